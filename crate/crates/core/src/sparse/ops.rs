//! Kernel operations. Every function checks types first and returns a
//! canonical result; symbolic payloads are handled without materializing
//! them where a cheap rule exists.

use std::ops::Range;
use std::sync::Arc;

use super::csc::{CscBuilder, CscMatrix};
use super::matrix::{DenseVector, Orientation, Payload, TypedMatrix};
use super::{Dimension, SparseError};

fn mismatch(op: &'static str, left: &Dimension, right: &Dimension) -> SparseError {
    SparseError::DimensionMismatch { op, left: left.clone(), right: right.clone() }
}

fn product(left: &Dimension, right: &Dimension) -> Result<Dimension, SparseError> {
    Dimension::product(left, right)
        .ok_or_else(|| SparseError::SpaceOverflow { left: left.clone(), right: right.clone() })
}

/// Per-column accumulator that picks a dense scan or a sort-merge depending
/// on how many contributions a column receives. Both sum equal rows in
/// contribution order, so the result does not depend on the choice.
struct Accumulator {
    nrows: usize,
    scratch: Vec<(u64, f64)>,
    dense: Vec<f64>,
    seen: Vec<bool>,
}

impl Accumulator {
    fn new(nrows: u64) -> Self {
        Accumulator { nrows: nrows as usize, scratch: Vec::new(), dense: Vec::new(), seen: Vec::new() }
    }

    fn flush(&mut self, b: &mut CscBuilder) {
        let n = self.scratch.len();
        if n > 32 && self.nrows <= n.saturating_mul(8) {
            if self.dense.is_empty() {
                self.dense = vec![0.0; self.nrows];
                self.seen = vec![false; self.nrows];
            }
            for &(r, v) in &self.scratch {
                let r = r as usize;
                if self.seen[r] {
                    self.dense[r] += v;
                } else {
                    self.seen[r] = true;
                    self.dense[r] = v;
                }
            }
            for r in 0..self.nrows {
                if self.seen[r] {
                    b.push(r as u64, self.dense[r]);
                    self.seen[r] = false;
                    self.dense[r] = 0.0;
                }
            }
        } else {
            b.push_unsorted(&mut self.scratch);
        }
        self.scratch.clear();
        b.finish_col();
    }
}

/// `a ∘ b`: matrix multiplication, typed `cols(b) → rows(a)`.
pub fn compose(a: &TypedMatrix, b: &TypedMatrix) -> Result<TypedMatrix, SparseError> {
    if a.col_dim() != b.row_dim() {
        return Err(mismatch("dot", a.col_dim(), b.row_dim()));
    }
    let rows = a.row_dim().clone();
    let cols = b.col_dim().clone();
    match (a.payload(), b.payload()) {
        (Payload::Identity(_), _) => return Ok(b.retyped(rows, cols)),
        (_, Payload::Identity(_)) => return Ok(a.retyped(rows, cols)),
        (Payload::Bang(_), _) => return Ok(column_sums(b)),
        (Payload::Dense(x), Payload::Dense(y))
            if x.orientation() == Orientation::Row && y.orientation() == Orientation::Column =>
        {
            let s = x.values().iter().zip(y.values()).map(|(p, q)| p * q).sum();
            return Ok(TypedMatrix::scalar(s));
        }
        (Payload::Dense(x), Payload::Sparse(m)) if x.orientation() == Orientation::Row && is_function(m) => {
            // one entry per column of `b`: each output cell reads one cell of `a`
            let (xv, bv) = (x.values(), m.values());
            let v: Arc<[f64]> = m.row_index().iter().zip(bv).map(|(&r, &w)| xv[r as usize] * w).collect();
            return Ok(TypedMatrix::from_dense(DenseVector::new(v, Orientation::Row), cols));
        }
        _ => {}
    }
    let ac = a.columns();
    let bc = b.columns();
    let ncols = cols.card();
    let mut out = CscBuilder::new(rows.card(), ncols);
    let mut acc = Accumulator::new(rows.card());
    for c in 0..ncols as usize {
        let mut entries = bc.col(c);
        if bc.col_len_hint(c) == Some(1) {
            // single contribution: gather the column of `a` as is
            if let Some((k, bv)) = entries.next() {
                for (r, av) in ac.col(k as usize) {
                    out.push(r, av * bv);
                }
            }
            out.finish_col();
            continue;
        }
        for (k, bv) in entries {
            acc.scratch.extend(ac.col(k as usize).map(|(r, av)| (r, av * bv)));
        }
        acc.flush(&mut out);
    }
    Ok(TypedMatrix::sparse_unchecked(out.build(), rows, cols))
}

/// Exactly one stored entry in every column, as in a projection.
fn is_function(m: &CscMatrix) -> bool {
    m.nnz() as u64 == m.ncols() && m.col_offsets().windows(2).all(|w| w[1] - w[0] == 1)
}

/// `! ∘ m`: the row vector of column sums.
fn column_sums(m: &TypedMatrix) -> TypedMatrix {
    let cols = m.col_dim().clone();
    let mc = m.columns();
    let sums: Vec<f64> = (0..cols.card() as usize).map(|c| mc.col(c).map(|(_, v)| v).sum()).collect();
    TypedMatrix::from_dense(DenseVector::new(sums, Orientation::Row), cols)
}

/// `m°`: transpose with swapped type.
pub fn converse(m: &TypedMatrix) -> TypedMatrix {
    let rows = m.col_dim().clone();
    let cols = m.row_dim().clone();
    match m.payload() {
        Payload::Identity(_) => m.retyped(rows, cols),
        Payload::Bang(n) => {
            TypedMatrix::from_dense(DenseVector::new(vec![1.0; *n as usize], Orientation::Column), rows)
        }
        Payload::Dense(v) => {
            let dim = if v.orientation() == Orientation::Row { rows } else { cols };
            TypedMatrix::from_dense(v.transposed(), dim)
        }
        Payload::Sparse(s) => TypedMatrix::sparse_unchecked(s.transpose(), rows, cols),
    }
}

/// `a ▽ b`: column-wise Kronecker product. Row `j` of `a` and row `k` of
/// `b` land on row `j·|rows(b)| + k`.
pub fn krao(a: &TypedMatrix, b: &TypedMatrix) -> Result<TypedMatrix, SparseError> {
    if a.col_dim() != b.col_dim() {
        return Err(mismatch("krao", a.col_dim(), b.col_dim()));
    }
    let rows = product(a.row_dim(), b.row_dim())?;
    let cols = a.col_dim().clone();
    match (a.payload(), b.payload()) {
        (Payload::Bang(_), _) => return Ok(b.retyped(rows, cols)),
        (_, Payload::Bang(_)) => return Ok(a.retyped(rows, cols)),
        (Payload::Dense(x), Payload::Dense(y))
            if x.orientation() == Orientation::Row && y.orientation() == Orientation::Row =>
        {
            let v: Arc<[f64]> = x.values().iter().zip(y.values()).map(|(p, q)| p * q).collect();
            return Ok(TypedMatrix::from_dense(DenseVector::new(v, Orientation::Row), cols));
        }
        _ => {}
    }
    let q = b.nrows();
    let ac = a.columns();
    let bc = b.columns();
    let ncols = cols.card();
    let mut out = CscBuilder::new(rows.card(), ncols);
    for c in 0..ncols as usize {
        for (j, av) in ac.col(c) {
            for (k, bv) in bc.col(c) {
                out.push(j * q + k, av * bv);
            }
        }
        out.finish_col();
    }
    Ok(TypedMatrix::sparse_unchecked(out.build(), rows, cols))
}

fn same_type(op: &'static str, a: &TypedMatrix, b: &TypedMatrix) -> Result<(), SparseError> {
    if a.row_dim() != b.row_dim() {
        return Err(mismatch(op, a.row_dim(), b.row_dim()));
    }
    if a.col_dim() != b.col_dim() {
        return Err(mismatch(op, a.col_dim(), b.col_dim()));
    }
    Ok(())
}

fn dense_rows<'a>(a: &'a TypedMatrix, b: &'a TypedMatrix) -> Option<(&'a DenseVector, &'a DenseVector)> {
    match (a.payload(), b.payload()) {
        (Payload::Dense(x), Payload::Dense(y)) if x.orientation() == y.orientation() => Some((x, y)),
        _ => None,
    }
}

fn zip_dense(a: &TypedMatrix, x: &DenseVector, y: &DenseVector, f: impl Fn(f64, f64) -> f64) -> TypedMatrix {
    let v: Vec<f64> = x.values().iter().zip(y.values()).map(|(&p, &q)| f(p, q)).collect();
    let dim = match x.orientation() {
        Orientation::Row => a.col_dim().clone(),
        Orientation::Column => a.row_dim().clone(),
    };
    TypedMatrix::from_dense(DenseVector::new(v, x.orientation()), dim)
}

/// Element-wise product.
pub fn hadamard(a: &TypedMatrix, b: &TypedMatrix) -> Result<TypedMatrix, SparseError> {
    same_type("hadamard", a, b)?;
    if let Some((x, y)) = dense_rows(a, b) {
        return Ok(zip_dense(a, x, y, |p, q| p * q));
    }
    let ac = a.columns();
    let bc = b.columns();
    let mut out = CscBuilder::new(a.nrows(), a.ncols());
    for c in 0..a.ncols() as usize {
        let mut l = ac.col(c).peekable();
        let mut r = bc.col(c).peekable();
        while let (Some(&(i, x)), Some(&(j, y))) = (l.peek(), r.peek()) {
            if i < j {
                l.next();
            } else if j < i {
                r.next();
            } else {
                out.push(i, x * y);
                l.next();
                r.next();
            }
        }
        out.finish_col();
    }
    Ok(TypedMatrix::sparse_unchecked(out.build(), a.row_dim().clone(), a.col_dim().clone()))
}

fn union_with(
    op: &'static str,
    a: &TypedMatrix,
    b: &TypedMatrix,
    f: impl Fn(f64, f64) -> f64,
) -> Result<TypedMatrix, SparseError> {
    same_type(op, a, b)?;
    if let Some((x, y)) = dense_rows(a, b) {
        return Ok(zip_dense(a, x, y, f));
    }
    let ac = a.columns();
    let bc = b.columns();
    let mut out = CscBuilder::new(a.nrows(), a.ncols());
    for c in 0..a.ncols() as usize {
        let mut l = ac.col(c).peekable();
        let mut r = bc.col(c).peekable();
        loop {
            match (l.peek().copied(), r.peek().copied()) {
                (Some((i, x)), Some((j, y))) => {
                    if i < j {
                        out.push(i, f(x, 0.0));
                        l.next();
                    } else if j < i {
                        out.push(j, f(0.0, y));
                        r.next();
                    } else {
                        out.push(i, f(x, y));
                        l.next();
                        r.next();
                    }
                }
                (Some((i, x)), None) => {
                    out.push(i, f(x, 0.0));
                    l.next();
                }
                (None, Some((j, y))) => {
                    out.push(j, f(0.0, y));
                    r.next();
                }
                (None, None) => break,
            }
        }
        out.finish_col();
    }
    Ok(TypedMatrix::sparse_unchecked(out.build(), a.row_dim().clone(), a.col_dim().clone()))
}

pub fn add(a: &TypedMatrix, b: &TypedMatrix) -> Result<TypedMatrix, SparseError> {
    union_with("add", a, b, |x, y| x + y)
}

pub fn subtract(a: &TypedMatrix, b: &TypedMatrix) -> Result<TypedMatrix, SparseError> {
    union_with("subtract", a, b, |x, y| x - y)
}

pub fn scale(m: &TypedMatrix, k: f64) -> TypedMatrix {
    map_values(m, |v| v * k)
}

/// Applies `f` to every stored entry. Entries mapped to zero are dropped;
/// implicit zeros are left alone, so `f(0)` is assumed to be zero.
pub fn map_values(m: &TypedMatrix, f: impl Fn(f64) -> f64) -> TypedMatrix {
    let rows = m.row_dim().clone();
    let cols = m.col_dim().clone();
    match m.payload() {
        Payload::Dense(v) => {
            let out: Vec<f64> = v.values().iter().map(|&x| if x == 0.0 { 0.0 } else { f(x) }).collect();
            let dim = if v.orientation() == Orientation::Row { cols } else { rows };
            TypedMatrix::from_dense(DenseVector::new(out, v.orientation()), dim)
        }
        _ => TypedMatrix::sparse_unchecked(m.to_csc().map_values(f), rows, cols),
    }
}

/// `m ∘ !°`: sums each row, giving a column vector over `rows(m)`.
/// Sum over eight independent accumulators, so additions need not wait on each other.
fn lane_sum(v: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let chunks = v.chunks_exact(8);
    let tail: f64 = chunks.remainder().iter().sum();
    for c in chunks {
        for (a, x) in acc.iter_mut().zip(c) {
            *a += x;
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// Dot product accumulated in the lane order of [`lane_sum`], so it equals
/// `lane_sum` over the element-wise products bit for bit.
fn lane_dot(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let (cx, cy) = (x.chunks_exact(8), y.chunks_exact(8));
    let tail: f64 = cx.remainder().iter().zip(cy.remainder()).map(|(p, q)| p * q).sum();
    for (a, b) in cx.zip(cy) {
        for ((s, p), q) in acc.iter_mut().zip(a).zip(b) {
            *s += p * q;
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// `row_sum(krao(a, b))`, without building the pairing when both are dense row vectors.
pub fn krao_sum(a: &TypedMatrix, b: &TypedMatrix) -> Result<TypedMatrix, SparseError> {
    if let (Payload::Dense(x), Payload::Dense(y)) = (a.payload(), b.payload()) {
        if x.orientation() == Orientation::Row && y.orientation() == Orientation::Row && a.col_dim() == b.col_dim() {
            let rows = product(a.row_dim(), b.row_dim())?;
            return Ok(TypedMatrix::scalar(lane_dot(x.values(), y.values())).retyped(rows, Dimension::unit()));
        }
    }
    Ok(row_sum(&krao(a, b)?))
}

pub fn row_sum(m: &TypedMatrix) -> TypedMatrix {
    let rows = m.row_dim().clone();
    let unit = Dimension::unit();
    match m.payload() {
        Payload::Identity(n) => {
            return TypedMatrix::from_dense(DenseVector::new(vec![1.0; *n as usize], Orientation::Column), rows)
        }
        Payload::Dense(v) if v.orientation() == Orientation::Column => return m.clone(),
        Payload::Dense(v) => return TypedMatrix::scalar(lane_sum(v.values())).retyped(rows, unit),
        _ => {}
    }
    let mc = m.columns();
    let n = rows.card();
    let nnz = m.nnz();
    let mut out = CscBuilder::new(n, 1);
    if n as usize <= nnz.saturating_mul(4).max(1 << 16) {
        let mut acc = vec![0.0f64; n as usize];
        for c in 0..m.ncols() as usize {
            for (r, v) in mc.col(c) {
                acc[r as usize] += v;
            }
        }
        for (r, v) in acc.into_iter().enumerate() {
            out.push(r as u64, v);
        }
    } else {
        let mut scratch: Vec<(u64, f64)> = Vec::with_capacity(nnz);
        for c in 0..m.ncols() as usize {
            scratch.extend(mc.col(c));
        }
        out.push_unsorted(&mut scratch);
    }
    out.finish_col();
    TypedMatrix::sparse_unchecked(out.build(), rows, unit)
}

/// Square diagonal matrix built from a vector of either orientation.
pub fn diagonal(v: &TypedMatrix) -> Result<TypedMatrix, SparseError> {
    let dim = if v.is_row_vector() {
        v.col_dim().clone()
    } else if v.is_column_vector() {
        v.row_dim().clone()
    } else {
        return Err(SparseError::NotAVector { op: "diag", rows: v.row_dim().clone(), cols: v.col_dim().clone() });
    };
    let n = dim.card();
    let mut b = CscBuilder::new(n, n);
    let mut vals = vec![0.0; n as usize];
    for (r, c, x) in v.to_csc().iter() {
        vals[(r + c) as usize] = x;
    }
    for (i, x) in vals.into_iter().enumerate() {
        b.push(i as u64, x);
        b.finish_col();
    }
    Ok(TypedMatrix::sparse_unchecked(b.build(), dim.clone(), dim))
}

/// Replaces every nonzero by one. Negative cells are rejected.
pub fn booleanize(m: &TypedMatrix) -> Result<TypedMatrix, SparseError> {
    match m.payload() {
        Payload::Identity(_) | Payload::Bang(_) => Ok(m.clone()),
        _ => {
            if let Some((r, c, v)) = m.to_csc().iter().find(|e| e.2 < 0.0) {
                return Err(SparseError::NegativeCell { row: r, col: c, value: v });
            }
            Ok(map_values(m, |_| 1.0))
        }
    }
}

/// Zeroes every column outside `range`; the type is unchanged.
pub fn restrict_columns(m: &TypedMatrix, range: Range<u64>) -> TypedMatrix {
    let rows = m.row_dim().clone();
    let cols = m.col_dim().clone();
    if range.start == 0 && range.end >= m.ncols() {
        return m.clone();
    }
    if let Payload::Dense(v) = m.payload() {
        if v.orientation() == Orientation::Row {
            let mut out = vec![0.0; v.len()];
            let (s, e) = (range.start as usize, (range.end as usize).min(v.len()));
            if s < e {
                out[s..e].copy_from_slice(&v.values()[s..e]);
            }
            return TypedMatrix::from_dense(DenseVector::new(out, Orientation::Row), cols);
        }
    }
    let mc = m.columns();
    let mut b = CscBuilder::new(m.nrows(), m.ncols());
    for c in 0..m.ncols() {
        if range.contains(&c) {
            for (r, v) in mc.col(c as usize) {
                b.push(r, v);
            }
        }
        b.finish_col();
    }
    TypedMatrix::sparse_unchecked(b.build(), rows, cols)
}

/// Re-indexes `m` into grown dimensions over the same spaces. Every
/// component may only have grown, so each old index maps to a unique new one.
pub fn realign(m: &TypedMatrix, rows: &Dimension, cols: &Dimension) -> Result<TypedMatrix, SparseError> {
    for (old, new) in [(m.row_dim(), rows), (m.col_dim(), cols)] {
        if !old.same_space_shape(new) || old.card() > new.card() {
            return Err(mismatch("realign", old, new));
        }
    }
    if m.row_dim() == rows && m.col_dim() == cols {
        return Ok(m.clone());
    }
    let map = |old: &Dimension, new: &Dimension, i: u64| -> u64 {
        if old == new {
            i
        } else {
            new.encode(&old.decode(i))
        }
    };
    let triplets = m
        .to_csc()
        .iter()
        .map(|(r, c, v)| (map(m.row_dim(), rows, r), map(m.col_dim(), cols, c), v))
        .collect::<Vec<_>>();
    let csc = CscMatrix::from_triplets(rows.card(), cols.card(), triplets);
    Ok(TypedMatrix::sparse_unchecked(csc, rows.clone(), cols.clone()))
}

/// Wraps an existing shared CSC buffer without copying.
pub fn from_shared(m: Arc<CscMatrix>, rows: Dimension, cols: Dimension) -> Result<TypedMatrix, SparseError> {
    if m.nrows() != rows.card() || m.ncols() != cols.card() {
        return Err(SparseError::ShapeMismatch { rows: m.nrows(), cols: m.ncols(), row_dim: rows, col_dim: cols });
    }
    Ok(TypedMatrix::shared_sparse(m, rows, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(id: &str, n: u64) -> Dimension {
        Dimension::labels(id, n)
    }

    fn mat(rows: Dimension, cols: Dimension, dense: &[Vec<f64>]) -> TypedMatrix {
        TypedMatrix::sparse(CscMatrix::from_dense(dense), rows, cols).unwrap()
    }

    #[test]
    fn fused_krao_sum_is_bitwise_row_sum() {
        for n in [1u64, 7, 8, 9, 1001] {
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let y: Vec<f64> = (0..n).map(|i| 1.0 / (i as f64 + 3.0)).collect();
            let (a, b) = (TypedMatrix::dense_row(x, d("A", n)).unwrap(), TypedMatrix::dense_row(y, d("A", n)).unwrap());
            let fused = krao_sum(&a, &b).unwrap();
            let plain = row_sum(&krao(&a, &b).unwrap());
            assert_eq!(fused.row_dim(), plain.row_dim());
            assert_eq!(fused.get(0, 0).to_bits(), plain.get(0, 0).to_bits(), "n = {n}");
        }
        let m = mat(d("B", 2), d("A", 3), &[vec![1.0, 2.0, 0.0], vec![0.0, 3.0, 4.0]]);
        let v = TypedMatrix::dense_row(vec![1.0, 2.0, 3.0], d("A", 3)).unwrap();
        assert!(krao_sum(&m, &v).unwrap().same_as(&row_sum(&krao(&m, &v).unwrap())));
    }

    #[test]
    fn compose_checks_types() {
        let a = mat(d("A", 2), d("B", 2), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let b = mat(d("C", 2), d("A", 2), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(compose(&a, &b), Err(SparseError::DimensionMismatch { .. })));
        assert!(compose(&b, &a).is_ok());
    }

    #[test]
    fn compose_matches_schoolbook() {
        let a = mat(d("A", 2), d("B", 3), &[vec![1.0, 2.0, 0.0], vec![0.0, 3.0, 4.0]]);
        let b = mat(d("B", 3), d("C", 2), &[vec![1.0, 1.0], vec![0.0, 2.0], vec![5.0, 0.0]]);
        let c = compose(&a, &b).unwrap();
        assert_eq!(c.to_csc().to_dense(), vec![vec![1.0, 5.0], vec![20.0, 6.0]]);
    }

    #[test]
    fn identity_and_bang_are_symbolic() {
        let a = mat(d("A", 2), d("B", 3), &[vec![1.0, 2.0, 0.0], vec![0.0, 3.0, 4.0]]);
        let l = compose(&TypedMatrix::identity(d("A", 2)), &a).unwrap();
        let r = compose(&a, &TypedMatrix::identity(d("B", 3))).unwrap();
        assert_eq!(l, a);
        assert_eq!(r, a);
        let s = compose(&TypedMatrix::bang(d("A", 2)), &a).unwrap();
        assert_eq!(s.entries(), vec![(0, 0, 1.0), (0, 1, 5.0), (0, 2, 4.0)]);
        assert_eq!(krao(&TypedMatrix::bang(d("B", 3)), &a).unwrap(), a);
    }

    #[test]
    fn krao_uses_jq_plus_k() {
        let a = mat(d("A", 2), d("X", 2), &[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let b = mat(d("B", 3), d("X", 2), &[vec![0.0, 1.0], vec![3.0, 0.0], vec![0.0, 1.0]]);
        let k = krao(&a, &b).unwrap();
        assert_eq!(k.nrows(), 6);
        assert_eq!(k.entries(), vec![(1, 0, 3.0), (3, 1, 2.0), (5, 1, 2.0)]);
    }

    #[test]
    fn add_drops_cancelled_entries() {
        let a = mat(d("A", 1), d("B", 2), &[vec![1.0, 2.0]]);
        let s = subtract(&a, &a).unwrap();
        assert_eq!(s.nnz(), 0);
        s.to_csc().check_canonical().unwrap();
    }

    #[test]
    fn converse_of_dense_and_bang() {
        let v = TypedMatrix::dense_row(vec![1.0, 0.0, 2.0], d("A", 3)).unwrap();
        let t = converse(&v);
        assert!(t.is_column_vector());
        assert_eq!(converse(&t), v);
        let b = converse(&TypedMatrix::bang(d("A", 2)));
        assert_eq!(b.entries(), vec![(0, 0, 1.0), (1, 0, 1.0)]);
    }

    #[test]
    fn row_sum_paths_agree() {
        let a = mat(d("A", 2), d("B", 3), &[vec![1.0, 2.0, 0.0], vec![0.0, 3.0, 4.0]]);
        assert_eq!(row_sum(&a).entries(), vec![(0, 0, 3.0), (1, 0, 7.0)]);
        let big = Dimension::labels("R", 1 << 20);
        let m = TypedMatrix::sparse(
            CscMatrix::from_triplets(1 << 20, 2, [(7, 0, 1.0), (900_000, 1, 2.0), (7, 1, 3.0)]),
            big,
            d("B", 2),
        )
        .unwrap();
        assert_eq!(row_sum(&m).entries(), vec![(7, 0, 4.0), (900_000, 0, 2.0)]);
    }

    #[test]
    fn restrict_and_realign() {
        let a = mat(d("A", 2), d("B", 3), &[vec![1.0, 2.0, 0.0], vec![0.0, 3.0, 4.0]]);
        let r = restrict_columns(&a, 1..2);
        assert_eq!(r.entries(), vec![(0, 1, 2.0), (1, 1, 3.0)]);
        let p = Dimension::product(&d("A", 2), &d("C", 2)).unwrap();
        let m = mat(p, Dimension::unit(), &[vec![1.0], vec![0.0], vec![0.0], vec![2.0]]);
        let grown = Dimension::product(&d("A", 3), &d("C", 3)).unwrap();
        let g = realign(&m, &grown, &Dimension::unit()).unwrap();
        assert_eq!(g.entries(), vec![(0, 0, 1.0), (4, 0, 2.0)]);
    }

    #[test]
    fn diagonal_of_row() {
        let v = TypedMatrix::dense_row(vec![1.0, 0.0, 2.0], d("A", 3)).unwrap();
        let g = diagonal(&v).unwrap();
        assert_eq!(g.entries(), vec![(0, 0, 1.0), (2, 2, 2.0)]);
        assert!(diagonal(&TypedMatrix::identity(d("A", 2))).is_err());
    }
}
