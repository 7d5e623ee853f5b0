use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io;

use crate::encoding::Label;
use crate::ingestion::LoadedDatabase;
use crate::sparse::{Dimension, Space, TypedMatrix};

/// Presentation order of result rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SortMode {
    /// Lexicographic by label tuple.
    #[default]
    Label,
    /// Largest value first; ties by label.
    ValueDesc,
    /// Column-major storage order of the result matrix.
    Storage,
}

impl std::str::FromStr for SortMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "label" => Ok(SortMode::Label),
            "value" => Ok(SortMode::ValueDesc),
            "storage" => Ok(SortMode::Storage),
            _ => Err(format!("unknown sort mode `{s}` (label, value, storage)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub labels: Vec<Label>,
    pub value: f64,
}

/// Nonzero cells of a result with decoded labels. Row-space components
/// come first, then column-space components; unit spaces contribute none.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<ResultRow>,
}

fn component_name(d: &Dimension) -> String {
    match d.space() {
        Space::Labels(id) => id.to_string(),
        Space::Rows(t) => format!("#{t}"),
        Space::Unit | Space::Product(_) => unreachable!("components are atomic"),
    }
}

fn decode(db: &LoadedDatabase, comps: &[Dimension], dim: &Dimension, index: u64, out: &mut Vec<Label>) {
    for (c, i) in comps.iter().zip(dim.decode(index)) {
        out.push(match c.space() {
            Space::Labels(id) => match db.dictionary(id).and_then(|d| d.label(i)) {
                Some(l) => l.clone(),
                None => Label::Int(i as i64),
            },
            _ => Label::Int(i as i64),
        });
    }
}

pub(crate) fn cmp_labels(a: &[Label], b: &[Label]) -> Ordering {
    a.cmp(b)
}

/// Decodes every stored cell of `m`.
pub fn materialize(m: &TypedMatrix, db: &LoadedDatabase, sort: SortMode) -> ResultTable {
    let rc = m.row_dim().components();
    let cc = m.col_dim().components();
    let columns = rc.iter().chain(cc.iter()).map(component_name).collect();
    let mut rows: Vec<ResultRow> = m
        .entries()
        .into_iter()
        .filter(|e| e.2 != 0.0)
        .map(|(r, c, value)| {
            let mut labels = Vec::with_capacity(rc.len() + cc.len());
            decode(db, &rc, m.row_dim(), r, &mut labels);
            decode(db, &cc, m.col_dim(), c, &mut labels);
            ResultRow { labels, value }
        })
        .collect();
    let mut t = ResultTable { columns, rows: Vec::new() };
    match sort {
        SortMode::Storage => {}
        SortMode::Label => rows.sort_by(|a, b| cmp_labels(&a.labels, &b.labels)),
        SortMode::ValueDesc => rows.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| cmp_labels(&a.labels, &b.labels))),
    }
    t.rows = rows;
    t
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Value at a label tuple; absent cells read as zero.
    pub fn get(&self, labels: &[Label]) -> f64 {
        self.rows.iter().find(|r| r.labels == labels).map_or(0.0, |r| r.value)
    }

    /// Values keyed by label tuple.
    pub fn to_map(&self) -> BTreeMap<Vec<Label>, f64> {
        self.rows.iter().map(|r| (r.labels.clone(), r.value)).collect()
    }

    /// CSV with one column per label component plus `value`.
    pub fn write_csv<W: io::Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let header: Vec<&str> = self.columns.iter().map(String::as_str).chain(["value"]).collect();
        out.write_record(&header)?;
        for r in &self.rows {
            let mut fields: Vec<String> = r.labels.iter().map(|l| l.to_string()).collect();
            fields.push(r.value.to_string());
            out.write_record(&fields)?;
        }
        out.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut v = Vec::new();
        self.write_csv(&mut v).expect("writing to memory");
        String::from_utf8(v).expect("labels are UTF-8")
    }
}
