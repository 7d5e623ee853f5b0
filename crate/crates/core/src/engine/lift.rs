use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::predicate::Compiled;
use super::view::View;
use super::EngineError;
use crate::dsl::{scalar_tables, BinOp, CmpOp, ScalarExpr};
use crate::sparse::{CscMatrix, TypedMatrix};

/// Scalar expression bound to stored rows of one table.
enum Cell<'a> {
    Num(f64),
    Values(&'a [f64]),
    Neg(Box<Cell<'a>>),
    Bin(BinOp, Box<Cell<'a>>, Box<Cell<'a>>),
    Case(Compiled<'a>, Box<Cell<'a>>, Box<Cell<'a>>),
}

fn bind<'a>(binding: &str, view: &'a View<'a>, e: &'a ScalarExpr) -> Result<Cell<'a>, EngineError> {
    Ok(match e {
        ScalarExpr::Num(n) => Cell::Num(*n),
        ScalarExpr::Attr(a) => Cell::Values(view.db().measure_values(a)?),
        ScalarExpr::Var(v) => unreachable!("variable `{v}` in a row-wise lift"),
        ScalarExpr::Neg(x) => Cell::Neg(Box::new(bind(binding, view, x)?)),
        ScalarExpr::Bin(op, a, b) => Cell::Bin(*op, Box::new(bind(binding, view, a)?), Box::new(bind(binding, view, b)?)),
        ScalarExpr::Case { when, then, otherwise } => Cell::Case(
            Compiled::new(binding, view, when)?,
            Box::new(bind(binding, view, then)?),
            Box::new(bind(binding, view, otherwise)?),
        ),
    })
}

fn apply(op: BinOp, a: f64, b: f64) -> Option<f64> {
    if op == BinOp::Div && b == 0.0 {
        None
    } else {
        Some(op.apply(a, b))
    }
}

/// Values over a row span: read from storage or freshly computed.
enum Vals<'a> {
    Stored(&'a [f64]),
    Computed(Arc<[f64]>),
}

impl std::ops::Deref for Vals<'_> {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        match self {
            Vals::Stored(v) => v,
            Vals::Computed(v) => v,
        }
    }
}

/// Column of values over a row span, with the rows where a chosen branch divided by zero.
struct Col<'a> {
    v: Vals<'a>,
    bad: Option<Vec<bool>>,
}

fn merge_bad(a: Option<Vec<bool>>, b: Option<Vec<bool>>) -> Option<Vec<bool>> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.iter().zip(&y).map(|(p, q)| *p || *q).collect()),
        (x, None) | (None, x) => x,
    }
}

fn eval_col<'a>(c: &Cell<'a>, off: usize, len: usize) -> Result<Col<'a>, EngineError> {
    Ok(match c {
        Cell::Num(n) => Col { v: Vals::Computed(std::iter::repeat_n(*n, len).collect()), bad: None },
        Cell::Values(v) => Col { v: Vals::Stored(&v[off..off + len]), bad: None },
        Cell::Neg(x) => {
            let x = eval_col(x, off, len)?;
            Col { v: Vals::Computed(x.v.iter().map(|v| -v).collect()), bad: x.bad }
        }
        Cell::Bin(op, a, b) => {
            let (a, b) = (eval_col(a, off, len)?, eval_col(b, off, len)?);
            let mut bad = merge_bad(a.bad, b.bad);
            if *op == BinOp::Div {
                bad = merge_bad(bad, Some(b.v.iter().map(|&d| d == 0.0).collect()));
            }
            let zip = |f: fn(f64, f64) -> f64| a.v.iter().zip(b.v.iter()).map(|(&x, &y)| f(x, y)).collect();
            let v = match op {
                BinOp::Add => zip(|x, y| x + y),
                BinOp::Sub => zip(|x, y| x - y),
                BinOp::Mul => zip(|x, y| x * y),
                BinOp::Div => zip(|x, y| x / y),
            };
            Col { v: Vals::Computed(v), bad }
        }
        Cell::Case(p, t, e) => {
            let when = p.span_bits()?;
            let (t, e) = (eval_col(t, off, len)?, eval_col(e, off, len)?);
            let v = when.iter().zip(t.v.iter().zip(e.v.iter())).map(|(&w, (&x, &y))| if w { x } else { y }).collect();
            let bad = match (t.bad, e.bad) {
                (None, None) => None,
                (tb, eb) => Some(
                    (0..len)
                        .map(|i| if when[i] { tb.as_ref().is_some_and(|b| b[i]) } else { eb.as_ref().is_some_and(|b| b[i]) })
                        .collect(),
                ),
            };
            Col { v: Vals::Computed(v), bad }
        }
    })
}

/// Element-wise evaluation over the measures of one table: a row vector `#t → 1`.
pub(crate) fn lift_rows(binding: &str, view: &View<'_>, e: &ScalarExpr) -> Result<TypedMatrix, EngineError> {
    let tables = scalar_tables(binding, view.db(), e)?;
    let table = tables.into_iter().next().expect("typecheck guarantees one table");
    let cell = bind(binding, view, e)?;
    let span = view.span(&table);
    let live = span.live();
    let Col { v: out, bad } = eval_col(&cell, span.offset as usize, span.len as usize)?;
    if let Some(i) = bad.and_then(|b| live.clone().find(|&i| b[i as usize])) {
        let row = span.offset + i;
        return Err(EngineError::DivisionByZero { binding: binding.to_string(), at: format!("row {row} of `{table}`") });
    }
    let (s, e) = (live.start as usize, live.end as usize);
    let out: Arc<[f64]> = match out {
        Vals::Computed(v) if s == 0 && e == v.len() => v,
        Vals::Stored(v) if s == 0 && e == v.len() => Arc::from(v),
        v => {
            let mut v = v.to_vec();
            v[..s].fill(0.0);
            v[e..].fill(0.0);
            v.into()
        }
    };
    Ok(TypedMatrix::dense_row(out, view.row_dim(&table)).expect("span matches row space"))
}

fn eval_vars(binding: &str, e: &ScalarExpr, vals: &BTreeMap<&str, f64>, at: &dyn Fn() -> String) -> Result<f64, EngineError> {
    let div0 = || EngineError::DivisionByZero { binding: binding.to_string(), at: at() };
    Ok(match e {
        ScalarExpr::Num(n) => *n,
        ScalarExpr::Var(v) => vals[v.as_str()],
        ScalarExpr::Attr(a) => unreachable!("attribute `{a}` in a cell-wise lift"),
        ScalarExpr::Neg(x) => -eval_vars(binding, x, vals, at)?,
        ScalarExpr::Bin(op, a, b) => {
            apply(*op, eval_vars(binding, a, vals, at)?, eval_vars(binding, b, vals, at)?).ok_or_else(div0)?
        }
        ScalarExpr::Case { .. } => unreachable!("case needs table rows"),
    })
}

/// Cell-wise evaluation over same-typed matrices, on the union of their stored cells.
pub(crate) fn lift_vars(
    binding: &str,
    e: &ScalarExpr,
    env: &BTreeMap<&str, TypedMatrix>,
) -> Result<TypedMatrix, EngineError> {
    let mut names = BTreeSet::new();
    e.collect_vars(&mut names);
    let mats: Vec<(&str, &TypedMatrix)> = names.iter().map(|n| (n.as_str(), &env[n.as_str()])).collect();
    let first = mats[0].1;
    let mut cells: BTreeMap<(u64, u64), Vec<f64>> = BTreeMap::new();
    for (k, (_, m)) in mats.iter().enumerate() {
        for (r, c, v) in m.entries() {
            cells.entry((c, r)).or_insert_with(|| vec![0.0; mats.len()])[k] = v;
        }
    }
    let mut triplets = Vec::with_capacity(cells.len());
    for ((c, r), vs) in cells {
        let vals: BTreeMap<&str, f64> = mats.iter().map(|(n, _)| *n).zip(vs).collect();
        let v = eval_vars(binding, e, &vals, &|| format!("cell ({r}, {c})"))?;
        triplets.push((r, c, v));
    }
    let csc = CscMatrix::from_triplets(first.nrows(), first.ncols(), triplets);
    Ok(TypedMatrix::sparse(csc, first.row_dim().clone(), first.col_dim().clone()).expect("shape copied"))
}

/// Keeps the stored cells of `m` whose value satisfies `op threshold`;
/// the threshold reads `1 → 1` variables.
pub(crate) fn having(
    binding: &str,
    m: &TypedMatrix,
    op: CmpOp,
    threshold: &ScalarExpr,
    env: &BTreeMap<&str, TypedMatrix>,
) -> Result<TypedMatrix, EngineError> {
    let mut names = BTreeSet::new();
    threshold.collect_vars(&mut names);
    let vals: BTreeMap<&str, f64> = names.iter().map(|n| (n.as_str(), env[n.as_str()].get(0, 0))).collect();
    let t = eval_vars(binding, threshold, &vals, &|| "having threshold".to_string())?;
    let kept: Vec<_> = m.entries().into_iter().filter(|(_, _, v)| op.eval(v, &t)).collect();
    let csc = CscMatrix::from_triplets(m.nrows(), m.ncols(), kept);
    Ok(TypedMatrix::sparse(csc, m.row_dim().clone(), m.col_dim().clone()).expect("shape copied"))
}
