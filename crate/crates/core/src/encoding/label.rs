use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::NaiveDate;
use ordered_float::OrderedFloat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueType {
    String,
    Date,
    Integer,
    Decimal,
}

impl ValueType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ValueType::Integer | ValueType::Decimal)
    }
}

impl FromStr for ValueType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "string" => Ok(ValueType::String),
            "date" => Ok(ValueType::Date),
            "integer" => Ok(ValueType::Integer),
            "decimal" => Ok(ValueType::Decimal),
            other => Err(format!("unknown value type `{other}`")),
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::String => "string",
            ValueType::Date => "date",
            ValueType::Integer => "integer",
            ValueType::Decimal => "decimal",
        })
    }
}

/// A decoded attribute value. Within one dictionary all labels share a variant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Int(i64),
    Dec(OrderedFloat<f64>),
    Date(NaiveDate),
    Text(Arc<str>),
}

impl Label {
    pub fn text(s: &str) -> Label {
        Label::Text(Arc::from(s))
    }

    pub fn date(s: &str) -> Option<Label> {
        parse_date(s).map(Label::Date)
    }

    /// Parses a raw field. Empty fields are nulls and are rejected.
    pub fn parse(raw: &str, ty: ValueType) -> Result<Label, String> {
        if raw.is_empty() {
            return Err("null value".into());
        }
        match ty {
            ValueType::String => Ok(Label::text(raw)),
            ValueType::Integer => raw
                .trim()
                .parse::<i64>()
                .map(Label::Int)
                .map_err(|_| format!("`{raw}` is not an integer")),
            ValueType::Decimal => parse_decimal(raw).map(|v| Label::Dec(OrderedFloat(v))),
            ValueType::Date => parse_date(raw.trim())
                .map(Label::Date)
                .ok_or_else(|| format!("`{raw}` is not a YYYY-MM-DD date")),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Label::Int(i) => Some(*i as f64),
            Label::Dec(d) => Some(d.0),
            _ => None,
        }
    }

    /// Day number for dates, used by range predicates.
    pub fn day_number(&self) -> Option<i32> {
        match self {
            Label::Date(d) => Some(day_number(*d)),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(i) => write!(f, "{i}"),
            Label::Dec(d) => write!(f, "{}", d.0),
            Label::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Label::Text(s) => f.write_str(s),
        }
    }
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

pub fn day_number(d: NaiveDate) -> i32 {
    use chrono::Datelike;
    d.num_days_from_ce()
}

pub fn parse_decimal(raw: &str) -> Result<f64, String> {
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{raw}` is not a decimal")),
    }
}
