use std::borrow::Cow;
use std::sync::Arc;

use super::csc::{CscBuilder, CscMatrix};
use super::dim::Dimension;
use super::SparseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `1 × len`, typed `A → 1`.
    Row,
    /// `len × 1`, typed `1 → A`.
    Column,
}

/// Dense numeric vector. Values are shared, so cloning and transposing are cheap.
#[derive(Clone, Debug)]
pub struct DenseVector {
    values: Arc<[f64]>,
    orientation: Orientation,
}

impl DenseVector {
    pub fn new(values: impl Into<Arc<[f64]>>, orientation: Orientation) -> Self {
        DenseVector { values: values.into(), orientation }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shared_values(&self) -> Arc<[f64]> {
        self.values.clone()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn transposed(&self) -> DenseVector {
        let orientation = match self.orientation {
            Orientation::Row => Orientation::Column,
            Orientation::Column => Orientation::Row,
        };
        DenseVector { values: self.values.clone(), orientation }
    }
}

#[derive(Clone, Debug)]
pub enum Payload {
    Sparse(Arc<CscMatrix>),
    Dense(DenseVector),
    /// Symbolic `id`, never materialized.
    Identity(u64),
    /// Symbolic `!`: the all-ones row vector of the given length.
    Bang(u64),
}

/// A matrix together with its arrow type `cols → rows`.
#[derive(Clone, Debug)]
pub struct TypedMatrix {
    payload: Payload,
    rows: Dimension,
    cols: Dimension,
}

impl TypedMatrix {
    pub fn sparse(m: CscMatrix, rows: Dimension, cols: Dimension) -> Result<Self, SparseError> {
        if m.nrows() != rows.card() || m.ncols() != cols.card() {
            return Err(SparseError::ShapeMismatch {
                rows: m.nrows(),
                cols: m.ncols(),
                row_dim: rows,
                col_dim: cols,
            });
        }
        Ok(Self::sparse_unchecked(m, rows, cols))
    }

    pub(crate) fn sparse_unchecked(m: CscMatrix, rows: Dimension, cols: Dimension) -> Self {
        debug_assert_eq!(m.nrows(), rows.card());
        debug_assert_eq!(m.ncols(), cols.card());
        TypedMatrix { payload: Payload::Sparse(Arc::new(m)), rows, cols }
    }

    pub(crate) fn shared_sparse(m: Arc<CscMatrix>, rows: Dimension, cols: Dimension) -> Self {
        TypedMatrix { payload: Payload::Sparse(m), rows, cols }
    }

    pub fn identity(dim: Dimension) -> Self {
        TypedMatrix { payload: Payload::Identity(dim.card()), rows: dim.clone(), cols: dim }
    }

    pub fn bang(dim: Dimension) -> Self {
        TypedMatrix { payload: Payload::Bang(dim.card()), rows: Dimension::unit(), cols: dim }
    }

    /// Row vector `dim → 1`.
    pub fn dense_row(values: impl Into<Arc<[f64]>>, dim: Dimension) -> Result<Self, SparseError> {
        let v = DenseVector::new(values, Orientation::Row);
        if v.len() as u64 != dim.card() {
            return Err(SparseError::ShapeMismatch {
                rows: 1,
                cols: v.len() as u64,
                row_dim: Dimension::unit(),
                col_dim: dim,
            });
        }
        Ok(Self::from_dense(v, dim))
    }

    /// Column vector `1 → dim`.
    pub fn dense_column(values: impl Into<Arc<[f64]>>, dim: Dimension) -> Result<Self, SparseError> {
        let v = DenseVector::new(values, Orientation::Column);
        if v.len() as u64 != dim.card() {
            return Err(SparseError::ShapeMismatch {
                rows: v.len() as u64,
                cols: 1,
                row_dim: dim,
                col_dim: Dimension::unit(),
            });
        }
        Ok(Self::from_dense(v, dim))
    }

    pub(crate) fn from_dense(v: DenseVector, dim: Dimension) -> Self {
        let (rows, cols) = match v.orientation() {
            Orientation::Row => (Dimension::unit(), dim),
            Orientation::Column => (dim, Dimension::unit()),
        };
        TypedMatrix { payload: Payload::Dense(v), rows, cols }
    }

    /// The `1 → 1` matrix holding `value`.
    pub fn scalar(value: f64) -> Self {
        let m = CscMatrix::from_triplets(1, 1, [(0, 0, value)]);
        Self::sparse_unchecked(m, Dimension::unit(), Dimension::unit())
    }

    pub fn zeros(rows: Dimension, cols: Dimension) -> Self {
        let m = CscMatrix::zeros(rows.card(), cols.card());
        Self::sparse_unchecked(m, rows, cols)
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn row_dim(&self) -> &Dimension {
        &self.rows
    }

    pub fn col_dim(&self) -> &Dimension {
        &self.cols
    }

    pub fn nrows(&self) -> u64 {
        self.rows.card()
    }

    pub fn ncols(&self) -> u64 {
        self.cols.card()
    }

    /// At most one entry per column, every stored entry equal to one.
    pub fn is_functional(&self) -> bool {
        match &self.payload {
            Payload::Sparse(m) => m.is_functional(),
            Payload::Identity(_) | Payload::Bang(_) => true,
            Payload::Dense(v) => match v.orientation() {
                Orientation::Row => v.values().iter().all(|&x| x == 0.0 || x == 1.0),
                Orientation::Column => {
                    let mut nz = v.values().iter().filter(|&&x| x != 0.0);
                    nz.next().is_none_or(|&x| x == 1.0) && nz.next().is_none()
                }
            },
        }
    }

    pub fn is_row_vector(&self) -> bool {
        self.rows.is_unit()
    }

    pub fn is_column_vector(&self) -> bool {
        self.cols.is_unit()
    }

    /// Same cells, new type. Cardinalities must not change.
    pub(crate) fn retyped(&self, rows: Dimension, cols: Dimension) -> Self {
        debug_assert_eq!(rows.card(), self.rows.card());
        debug_assert_eq!(cols.card(), self.cols.card());
        TypedMatrix { payload: self.payload.clone(), rows, cols }
    }

    /// Canonical CSC form of the cells, materializing symbolic payloads.
    pub fn to_csc(&self) -> Cow<'_, CscMatrix> {
        match &self.payload {
            Payload::Sparse(m) => Cow::Borrowed(m.as_ref()),
            Payload::Identity(n) => Cow::Owned(CscMatrix::identity(*n)),
            Payload::Bang(n) => {
                let mut b = CscBuilder::with_capacity(1, *n, *n as usize);
                for _ in 0..*n {
                    b.push(0, 1.0);
                    b.finish_col();
                }
                Cow::Owned(b.build())
            }
            Payload::Dense(v) => Cow::Owned(dense_to_csc(v)),
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.payload {
            Payload::Sparse(m) => m.nnz(),
            Payload::Identity(n) | Payload::Bang(n) => *n as usize,
            Payload::Dense(v) => v.values().iter().filter(|&&x| x != 0.0).count(),
        }
    }

    pub fn get(&self, row: u64, col: u64) -> f64 {
        match &self.payload {
            Payload::Sparse(m) => m.get(row, col),
            Payload::Identity(_) => f64::from(u8::from(row == col)),
            Payload::Bang(_) => 1.0,
            Payload::Dense(v) => match v.orientation() {
                Orientation::Row => v.values()[col as usize],
                Orientation::Column => v.values()[row as usize],
            },
        }
    }

    /// Stored nonzero entries `(row, col, value)` in column-major order.
    pub fn entries(&self) -> Vec<(u64, u64, f64)> {
        self.to_csc().iter().collect()
    }

    pub(crate) fn columns(&self) -> Columns<'_> {
        match &self.payload {
            Payload::Sparse(m) => Columns::Sparse(m),
            Payload::Identity(_) => Columns::Identity,
            Payload::Bang(_) => Columns::Bang,
            Payload::Dense(v) => match v.orientation() {
                Orientation::Row => Columns::DenseRow(v.values()),
                Orientation::Column => Columns::DenseCol(v.values()),
            },
        }
    }

    /// Cell-wise equality including the arrow type.
    pub fn same_as(&self, other: &TypedMatrix) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.to_csc() == other.to_csc()
    }

    /// Tab-separated debug dump, one stored entry per line, ordered by (col, row).
    pub fn dump(&self, row_label: impl Fn(u64) -> String, col_label: impl Fn(u64) -> String) -> String {
        let mut out = String::new();
        for (r, c, v) in self.to_csc().iter() {
            out.push_str(&format!("{}\t{}\t{}\n", row_label(r), col_label(c), v));
        }
        out
    }
}

impl PartialEq for TypedMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

fn dense_to_csc(v: &DenseVector) -> CscMatrix {
    let n = v.len() as u64;
    match v.orientation() {
        Orientation::Row => {
            let mut b = CscBuilder::with_capacity(1, n, v.len());
            for &x in v.values() {
                b.push(0, x);
                b.finish_col();
            }
            b.build()
        }
        Orientation::Column => {
            let mut b = CscBuilder::with_capacity(n, 1, v.len());
            for (i, &x) in v.values().iter().enumerate() {
                b.push(i as u64, x);
            }
            b.finish_col();
            b.build()
        }
    }
}

/// Uniform column access over every payload kind without materializing.
pub(crate) enum Columns<'a> {
    Sparse(&'a CscMatrix),
    Identity,
    Bang,
    DenseRow(&'a [f64]),
    DenseCol(&'a [f64]),
}

impl<'a> Columns<'a> {
    #[inline]
    pub(crate) fn col(&self, c: usize) -> ColEntries<'a> {
        match self {
            Columns::Sparse(m) => {
                let (r, v) = m.column(c);
                ColEntries::Slice(r, v, 0)
            }
            Columns::Identity => ColEntries::One(Some((c as u64, 1.0))),
            Columns::Bang => ColEntries::One(Some((0, 1.0))),
            Columns::DenseRow(v) => {
                let x = v[c];
                ColEntries::One(if x != 0.0 { Some((0, x)) } else { None })
            }
            Columns::DenseCol(v) => ColEntries::Dense(v, 0),
        }
    }

    /// Number of stored entries in column `c` when known without scanning.
    #[inline]
    pub(crate) fn col_len_hint(&self, c: usize) -> Option<usize> {
        match self {
            Columns::Sparse(m) => Some(m.col_offsets()[c + 1] - m.col_offsets()[c]),
            Columns::Identity | Columns::Bang => Some(1),
            Columns::DenseRow(v) => Some(usize::from(v[c] != 0.0)),
            Columns::DenseCol(_) => None,
        }
    }
}

pub(crate) enum ColEntries<'a> {
    Slice(&'a [u64], &'a [f64], usize),
    One(Option<(u64, f64)>),
    Dense(&'a [f64], usize),
}

impl Iterator for ColEntries<'_> {
    type Item = (u64, f64);

    #[inline]
    fn next(&mut self) -> Option<(u64, f64)> {
        match self {
            ColEntries::Slice(r, v, i) => {
                if *i < r.len() {
                    let out = (r[*i], v[*i]);
                    *i += 1;
                    Some(out)
                } else {
                    None
                }
            }
            ColEntries::One(e) => e.take(),
            ColEntries::Dense(v, i) => {
                while *i < v.len() {
                    let k = *i;
                    *i += 1;
                    if v[k] != 0.0 {
                        return Some((k as u64, v[k]));
                    }
                }
                None
            }
        }
    }
}
