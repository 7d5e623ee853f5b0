//! Compressed sparse column storage.

/// CSC matrix: `values[k]` sits at row `row_index[k]` of the column whose
/// range `col_offsets[c]..col_offsets[c + 1]` contains `k`.
///
/// Canonical form (kept by every constructor in this crate): offsets start
/// at 0 and never decrease, rows are strictly increasing inside a column and
/// no stored value is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix {
    nrows: u64,
    ncols: u64,
    col_offsets: Vec<usize>,
    row_index: Vec<u64>,
    values: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(nrows: u64, ncols: u64) -> Self {
        CscMatrix {
            nrows,
            ncols,
            col_offsets: vec![0; ncols as usize + 1],
            row_index: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from raw arrays, rejecting anything that is not canonical.
    pub fn from_parts(
        nrows: u64,
        ncols: u64,
        col_offsets: Vec<usize>,
        row_index: Vec<u64>,
        values: Vec<f64>,
    ) -> Result<Self, String> {
        let m = CscMatrix { nrows, ncols, col_offsets, row_index, values };
        m.check_canonical()?;
        Ok(m)
    }

    /// Builds from unordered `(row, col, value)` triplets; duplicates are
    /// summed and zeros dropped.
    pub fn from_triplets<I>(nrows: u64, ncols: u64, triplets: I) -> Self
    where
        I: IntoIterator<Item = (u64, u64, f64)>,
    {
        let mut t: Vec<(u64, u64, f64)> = triplets.into_iter().collect();
        t.sort_by_key(|a| (a.1, a.0));
        let mut b = CscBuilder::new(nrows, ncols);
        let mut i = 0;
        for col in 0..ncols {
            while i < t.len() && t[i].1 == col {
                let (r, _, mut v) = t[i];
                i += 1;
                while i < t.len() && t[i].1 == col && t[i].0 == r {
                    v += t[i].2;
                    i += 1;
                }
                b.push(r, v);
            }
            b.finish_col();
        }
        b.build()
    }

    /// Dense row-major input, mainly for tests and small fixtures.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len() as u64;
        let ncols = rows.first().map_or(0, |r| r.len()) as u64;
        let mut b = CscBuilder::new(nrows, ncols);
        for c in 0..ncols as usize {
            for (r, row) in rows.iter().enumerate() {
                b.push(r as u64, row[c]);
            }
            b.finish_col();
        }
        b.build()
    }

    pub fn identity(n: u64) -> Self {
        CscMatrix {
            nrows: n,
            ncols: n,
            col_offsets: (0..=n as usize).collect(),
            row_index: (0..n).collect(),
            values: vec![1.0; n as usize],
        }
    }

    pub fn nrows(&self) -> u64 {
        self.nrows
    }

    pub fn ncols(&self) -> u64 {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_offsets(&self) -> &[usize] {
        &self.col_offsets
    }

    pub fn row_index(&self) -> &[u64] {
        &self.row_index
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row indices and values stored in column `c`.
    #[inline]
    pub fn column(&self, c: usize) -> (&[u64], &[f64]) {
        let (s, e) = (self.col_offsets[c], self.col_offsets[c + 1]);
        (&self.row_index[s..e], &self.values[s..e])
    }

    pub fn get(&self, row: u64, col: u64) -> f64 {
        let (rows, vals) = self.column(col as usize);
        match rows.binary_search(&row) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Stored entries as `(row, col, value)` in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64, f64)> + '_ {
        (0..self.ncols as usize).flat_map(move |c| {
            let (rows, vals) = self.column(c);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, c as u64, v))
        })
    }

    /// At most one entry per column and every value equal to one.
    pub fn is_functional(&self) -> bool {
        self.col_offsets.windows(2).all(|w| w[1] - w[0] <= 1) && self.values.iter().all(|&v| v == 1.0)
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut counts = vec![0usize; self.nrows as usize + 1];
        for &r in &self.row_index {
            counts[r as usize + 1] += 1;
        }
        for i in 0..self.nrows as usize {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut next = counts;
        let mut row_index = vec![0u64; self.nnz()];
        let mut values = vec![0f64; self.nnz()];
        // columns visited in increasing order, so rows of the transpose come out sorted
        for c in 0..self.ncols as usize {
            let (rows, vals) = self.column(c);
            for (&r, &v) in rows.iter().zip(vals) {
                let slot = next[r as usize];
                row_index[slot] = c as u64;
                values[slot] = v;
                next[r as usize] += 1;
            }
        }
        CscMatrix { nrows: self.ncols, ncols: self.nrows, col_offsets: offsets, row_index, values }
    }

    /// Same entries with more rows; valid because rows are only appended.
    pub fn with_nrows(&self, nrows: u64) -> CscMatrix {
        debug_assert!(nrows >= self.nrows);
        CscMatrix { nrows, ..self.clone() }
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> CscMatrix {
        let mut b = CscBuilder::with_capacity(self.nrows, self.ncols, self.nnz());
        for c in 0..self.ncols as usize {
            let (rows, vals) = self.column(c);
            for (&r, &v) in rows.iter().zip(vals) {
                b.push(r, f(v));
            }
            b.finish_col();
        }
        b.build()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols as usize]; self.nrows as usize];
        for (r, c, v) in self.iter() {
            out[r as usize][c as usize] = v;
        }
        out
    }

    pub fn check_canonical(&self) -> Result<(), String> {
        if self.col_offsets.len() != self.ncols as usize + 1 {
            return Err(format!(
                "col_offsets has length {} for {} columns",
                self.col_offsets.len(),
                self.ncols
            ));
        }
        if self.col_offsets[0] != 0 {
            return Err("col_offsets[0] must be 0".into());
        }
        if self.col_offsets.windows(2).any(|w| w[1] < w[0]) {
            return Err("col_offsets must be non-decreasing".into());
        }
        if *self.col_offsets.last().unwrap() != self.nnz() || self.row_index.len() != self.nnz() {
            return Err("col_offsets[ncols] must equal nnz".into());
        }
        for c in 0..self.ncols as usize {
            let (rows, vals) = self.column(c);
            if rows.windows(2).any(|w| w[1] <= w[0]) {
                return Err(format!("rows of column {c} not strictly increasing"));
            }
            if rows.iter().any(|&r| r >= self.nrows) {
                return Err(format!("row index out of range in column {c}"));
            }
            if vals.contains(&0.0) {
                return Err(format!("stored zero in column {c}"));
            }
        }
        Ok(())
    }
}

/// Column-by-column builder. Rows must be pushed in increasing order
/// within a column; zero values are skipped.
pub struct CscBuilder {
    nrows: u64,
    ncols: u64,
    col_offsets: Vec<usize>,
    row_index: Vec<u64>,
    values: Vec<f64>,
}

impl CscBuilder {
    pub fn new(nrows: u64, ncols: u64) -> Self {
        Self::with_capacity(nrows, ncols, 0)
    }

    pub fn with_capacity(nrows: u64, ncols: u64, nnz: usize) -> Self {
        let mut col_offsets = Vec::with_capacity(ncols as usize + 1);
        col_offsets.push(0);
        CscBuilder {
            nrows,
            ncols,
            col_offsets,
            row_index: Vec::with_capacity(nnz),
            values: Vec::with_capacity(nnz),
        }
    }

    #[inline]
    pub fn push(&mut self, row: u64, value: f64) {
        if value != 0.0 {
            debug_assert!(row < self.nrows);
            debug_assert!(
                self.row_index.len() == *self.col_offsets.last().unwrap()
                    || *self.row_index.last().unwrap() < row
            );
            self.row_index.push(row);
            self.values.push(value);
        }
    }

    #[inline]
    pub fn finish_col(&mut self) {
        self.col_offsets.push(self.row_index.len());
    }

    /// Pushes the entries of a scratch buffer, sorting and merging equal rows.
    pub fn push_unsorted(&mut self, scratch: &mut [(u64, f64)]) {
        if scratch.len() > 1 {
            // stable: equal rows are summed in contribution order
            scratch.sort_by_key(|e| e.0);
        }
        let mut i = 0;
        while i < scratch.len() {
            let (r, mut v) = scratch[i];
            i += 1;
            while i < scratch.len() && scratch[i].0 == r {
                v += scratch[i].1;
                i += 1;
            }
            self.push(r, v);
        }
    }

    pub fn build(mut self) -> CscMatrix {
        while self.col_offsets.len() < self.ncols as usize + 1 {
            self.finish_col();
        }
        debug_assert_eq!(self.col_offsets.len(), self.ncols as usize + 1);
        CscMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            col_offsets: self.col_offsets,
            row_index: self.row_index,
            values: self.values,
        }
    }
}
