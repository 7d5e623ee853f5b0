//! Dictionary encoding: labels to dense indices, dimension columns to
//! functional projection matrices, measure columns to dense row vectors.

mod dictionary;
mod label;

use std::fmt;
use std::str::FromStr;

pub use dictionary::Dictionary;
pub use label::{day_number, parse_date, parse_decimal, Label, ValueType};

use crate::sparse::{CscBuilder, CscMatrix, DenseVector, Dimension, Orientation, TypedMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AttrKind {
    Dimension,
    Measure,
    PrimaryKey,
    ForeignKey,
}

impl AttrKind {
    /// Kinds that are encoded as projection matrices.
    pub fn is_dimensional(self) -> bool {
        !matches!(self, AttrKind::Measure)
    }
}

impl FromStr for AttrKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dimension" => Ok(AttrKind::Dimension),
            "measure" => Ok(AttrKind::Measure),
            "primary_key" => Ok(AttrKind::PrimaryKey),
            "foreign_key" => Ok(AttrKind::ForeignKey),
            other => Err(format!("unknown attribute kind `{other}`")),
        }
    }
}

impl fmt::Display for AttrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttrKind::Dimension => "dimension",
            AttrKind::Measure => "measure",
            AttrKind::PrimaryKey => "primary_key",
            AttrKind::ForeignKey => "foreign_key",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EncodingError {
    #[error("dictionary `{space}` is frozen; cannot add `{label}`")]
    FrozenDictionary { space: String, label: String },
    #[error("duplicate key `{label}` in `{space}` at row {row}")]
    DuplicateKey { space: String, label: String, row: usize },
    #[error("key `{label}` at row {row} has index {found} in `{space}`, expected {expected}")]
    KeyOrderViolation { space: String, label: String, row: usize, expected: u64, found: u64 },
    #[error("key `{label}` at row {row} is not present in `{space}`")]
    ReferentialIntegrity { space: String, label: String, row: usize },
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
}

/// Interns every label and returns the index sequence.
pub fn encode_codes<I>(values: I, dict: &mut Dictionary) -> Result<Vec<u64>, EncodingError>
where
    I: IntoIterator<Item = Label>,
{
    values.into_iter().map(|l| dict.intern(l)).collect()
}

/// Looks up every label without growing the dictionary.
pub fn encode_foreign_codes<I>(values: I, dict: &Dictionary) -> Result<Vec<u64>, EncodingError>
where
    I: IntoIterator<Item = Label>,
{
    values
        .into_iter()
        .enumerate()
        .map(|(row, l)| {
            dict.index_of(&l).ok_or_else(|| EncodingError::ReferentialIntegrity {
                space: dict.space().to_string(),
                label: l.to_string(),
                row,
            })
        })
        .collect()
}

/// Functional `nrows × codes.len()` matrix with column `i` holding a one at row `codes[i]`.
pub fn projection_csc(codes: &[u64], nrows: u64) -> CscMatrix {
    let mut b = CscBuilder::with_capacity(nrows, codes.len() as u64, codes.len());
    for &r in codes {
        b.push(r, 1.0);
        b.finish_col();
    }
    b.build()
}

/// Projection matrix of a dimension column, typed `cols → dict`.
pub fn encode_dimension<I>(values: I, dict: &mut Dictionary, cols: Dimension) -> Result<TypedMatrix, EncodingError>
where
    I: IntoIterator<Item = Label>,
{
    let codes = encode_codes(values, dict)?;
    assert_eq!(codes.len() as u64, cols.card(), "column dimension must match the value count");
    let m = projection_csc(&codes, dict.len() as u64);
    Ok(TypedMatrix::sparse(m, dict.dimension(), cols).expect("shape follows from construction"))
}

/// Interns primary keys so that row `offset + i` receives index `offset + i`.
pub fn intern_primary_keys<I>(values: I, dict: &mut Dictionary, offset: u64) -> Result<u64, EncodingError>
where
    I: IntoIterator<Item = Label>,
{
    let mut n = 0u64;
    for (i, l) in values.into_iter().enumerate() {
        let expected = offset + i as u64;
        let shown = l.to_string();
        let found = dict.intern(l)?;
        if found < expected {
            return Err(EncodingError::DuplicateKey { space: dict.space().to_string(), label: shown, row: i });
        }
        if found > expected {
            return Err(EncodingError::KeyOrderViolation {
                space: dict.space().to_string(),
                label: shown,
                row: i,
                expected,
                found,
            });
        }
        n += 1;
    }
    if dict.len() as u64 != offset + n {
        return Err(EncodingError::KeyOrderViolation {
            space: dict.space().to_string(),
            label: dict.label(offset + n).map(|l| l.to_string()).unwrap_or_default(),
            row: n as usize,
            expected: offset + n,
            found: dict.len() as u64,
        });
    }
    Ok(n)
}

/// Primary-key projection: the table's rows are identified with the key
/// space, so the projection is the symbolic identity on it.
pub fn encode_primary_key<I>(values: I, dict: &mut Dictionary) -> Result<TypedMatrix, EncodingError>
where
    I: IntoIterator<Item = Label>,
{
    intern_primary_keys(values, dict, 0)?;
    Ok(TypedMatrix::identity(dict.dimension()))
}

/// Parses a measure column into a row vector.
pub fn encode_measure<'a, I>(values: I) -> Result<DenseVector, EncodingError>
where
    I: IntoIterator<Item = &'a str>,
{
    let v = values
        .into_iter()
        .enumerate()
        .map(|(row, raw)| {
            if raw.is_empty() {
                return Err(EncodingError::Parse { row, message: "null value".into() });
            }
            parse_decimal(raw).map_err(|message| EncodingError::Parse { row, message })
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(DenseVector::new(v, Orientation::Row))
}
