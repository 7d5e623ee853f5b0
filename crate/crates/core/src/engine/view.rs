use std::borrow::Cow;
use std::collections::BTreeMap;
use std::ops::Range;

use crate::encoding::AttrKind;
use crate::ingestion::{AttributeSpec, LoadError, LoadedDatabase};
use crate::sparse::{ops, CscMatrix, Dimension, TypedMatrix};

/// How a table's rows are exposed to an evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Window {
    /// Only these rows exist; the row space shrinks to their count.
    Slice(Range<u64>),
    /// The row space is unchanged but rows outside the range read as absent.
    Mask(Range<u64>),
}

/// A read-only window onto a loaded database. The full view sees every
/// row; a delta view restricts one table to its most recently appended rows.
#[derive(Clone, Debug)]
pub struct View<'a> {
    db: &'a LoadedDatabase,
    windows: BTreeMap<String, Window>,
}

/// Rows of one table as seen through a view: view index `i` is stored row
/// `offset + i`, and only stored rows in `active` are live.
#[derive(Clone, Debug)]
pub(crate) struct RowSpan {
    pub offset: u64,
    pub len: u64,
    pub active: Range<u64>,
}

impl RowSpan {
    /// Live view indices.
    pub fn live(&self) -> Range<u64> {
        let s = self.active.start.max(self.offset) - self.offset;
        let e = self.active.end.min(self.offset + self.len).max(self.offset) - self.offset;
        s..e.max(s)
    }
}

impl<'a> View<'a> {
    pub fn full(db: &'a LoadedDatabase) -> Self {
        View { db, windows: BTreeMap::new() }
    }

    /// Restricts `table` to `rows`. Tables with a primary key keep their
    /// key space (other tables' foreign keys point into it), so their rows
    /// are masked rather than sliced.
    pub fn restricted(db: &'a LoadedDatabase, table: &str, rows: Range<u64>) -> Self {
        let has_pk = db.schema().table(table).and_then(|t| t.primary_key()).is_some();
        let w = if has_pk { Window::Mask(rows) } else { Window::Slice(rows) };
        View { db, windows: BTreeMap::from([(table.to_string(), w)]) }
    }

    pub fn db(&self) -> &'a LoadedDatabase {
        self.db
    }

    pub(crate) fn span(&self, table: &str) -> RowSpan {
        let n = self.db.row_count(table);
        match self.windows.get(table) {
            None => RowSpan { offset: 0, len: n, active: 0..n },
            Some(Window::Slice(r)) => RowSpan { offset: r.start, len: r.end - r.start, active: r.clone() },
            Some(Window::Mask(r)) => RowSpan { offset: 0, len: n, active: r.clone() },
        }
    }

    pub fn attribute(&self, attr: &str) -> Result<&'a AttributeSpec, LoadError> {
        self.db.attribute(attr)
    }

    pub fn row_dim(&self, table: &str) -> Dimension {
        match self.windows.get(table) {
            Some(Window::Slice(r)) => Dimension::rows(table, r.end - r.start),
            _ => self.db.row_dim(table),
        }
    }

    /// Projection `#t → space`, or the key identity for primary keys.
    pub fn projection(&self, attr: &str) -> Result<TypedMatrix, LoadError> {
        let a = self.attribute(attr)?;
        let full = self.db.projection(attr)?;
        Ok(match self.windows.get(&a.table) {
            None => full,
            Some(Window::Mask(r)) => ops::restrict_columns(&full, r.clone()),
            Some(Window::Slice(r)) => {
                let csc = slice_columns(&full.to_csc(), r.clone());
                TypedMatrix::sparse(csc, full.row_dim().clone(), self.row_dim(&a.table))
                    .expect("slice keeps the row space")
            }
        })
    }

    /// Measure values over the view's rows; masked rows read as zero.
    pub fn measure_values(&self, attr: &str) -> Result<Cow<'a, [f64]>, LoadError> {
        let a = self.attribute(attr)?;
        let all = self.db.measure_values(attr)?;
        Ok(match self.windows.get(&a.table) {
            None => Cow::Borrowed(all),
            Some(Window::Slice(r)) => Cow::Borrowed(&all[r.start as usize..r.end as usize]),
            Some(Window::Mask(r)) => {
                let mut v = vec![0.0; all.len()];
                v[r.start as usize..r.end as usize].copy_from_slice(&all[r.start as usize..r.end as usize]);
                Cow::Owned(v)
            }
        })
    }

    pub fn measure(&self, attr: &str) -> Result<TypedMatrix, LoadError> {
        let a = self.attribute(attr)?;
        if !self.windows.contains_key(&a.table) {
            return self.db.measure(attr);
        }
        let v = self.measure_values(attr)?.into_owned();
        Ok(TypedMatrix::dense_row(v, self.row_dim(&a.table)).expect("measure length tracks the view"))
    }

    /// Matrix bound to an attribute reference in matrix position.
    pub fn attr_matrix(&self, attr: &str) -> Result<TypedMatrix, LoadError> {
        match self.attribute(attr)?.kind {
            AttrKind::Measure => self.measure(attr),
            _ => self.projection(attr),
        }
    }
}

/// Columns `range` of `m` as a new matrix.
fn slice_columns(m: &CscMatrix, range: Range<u64>) -> CscMatrix {
    let offs = m.col_offsets();
    let (s, e) = (range.start as usize, range.end as usize);
    let base = offs[s];
    let col_offsets: Vec<usize> = offs[s..=e].iter().map(|o| o - base).collect();
    let row_index = m.row_index()[base..offs[e]].to_vec();
    let values = m.values()[base..offs[e]].to_vec();
    CscMatrix::from_parts(m.nrows(), (e - s) as u64, col_offsets, row_index, values)
        .expect("a column slice of a canonical matrix is canonical")
}
