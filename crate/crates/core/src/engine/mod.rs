//! Script evaluation over a loaded database.

mod lift;
mod materialize;
mod predicate;
mod rewrite;
mod view;

use std::collections::BTreeMap;

pub use materialize::{materialize, ResultRow, ResultTable, SortMode};
pub use predicate::like;
pub use rewrite::rewrite;
pub use view::View;

use crate::dsl::{typecheck, Expr, MatrixType, Script, TypeError};
use crate::ingestion::{LoadError, LoadedDatabase};
use crate::sparse::{ops, SparseError, TypedMatrix};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("in {op}")]
    Kernel { op: &'static str, source: SparseError },
    #[error("`{binding}`: division by zero at {at}")]
    DivisionByZero { binding: String, at: String },
    #[error("script has no bindings")]
    EmptyScript,
}

impl EngineError {
    pub(crate) fn kernel(op: &'static str, source: SparseError) -> Self {
        EngineError::Kernel { op, source }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EvalOptions {
    /// Apply the pairing rewrites before evaluation.
    pub rewrite: bool,
}

/// Evaluated bindings in script order.
#[derive(Clone, Debug, Default)]
pub struct Environment {
    bindings: Vec<(String, TypedMatrix)>,
}

impl Environment {
    pub fn get(&self, name: &str) -> Option<&TypedMatrix> {
        self.bindings.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    /// Value of the last binding.
    pub fn result(&self) -> Option<&TypedMatrix> {
        self.bindings.last().map(|(_, m)| m)
    }

    pub fn into_result(self) -> Option<TypedMatrix> {
        self.bindings.into_iter().last().map(|(_, m)| m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &TypedMatrix)> {
        self.bindings.iter().map(|(n, m)| (n.as_str(), m))
    }
}

pub fn evaluate(script: &Script, db: &LoadedDatabase) -> Result<Environment, EngineError> {
    evaluate_with(script, &View::full(db), EvalOptions::default())
}

/// Evaluates `script` through `view`, which may hide rows of one table.
pub fn evaluate_with(script: &Script, view: &View<'_>, opts: EvalOptions) -> Result<Environment, EngineError> {
    if script.bindings.is_empty() {
        return Err(EngineError::EmptyScript);
    }
    let types = typecheck(script, view.db())?;
    let exprs: Vec<Expr> = if opts.rewrite {
        let env: BTreeMap<String, MatrixType> = types.bindings.iter().cloned().collect();
        script.bindings.iter().map(|b| rewrite(&b.expr, &env, view.db())).collect()
    } else {
        script.bindings.iter().map(|b| b.expr.clone()).collect()
    };
    let mut env: BTreeMap<&str, TypedMatrix> = BTreeMap::new();
    let mut out = Environment::default();
    for (b, e) in script.bindings.iter().zip(&exprs) {
        let m = eval(&b.name, e, view, &env)?;
        env.insert(&b.name, m.clone());
        out.bindings.push((b.name.clone(), m));
    }
    Ok(out)
}

fn eval(binding: &str, e: &Expr, view: &View<'_>, env: &BTreeMap<&str, TypedMatrix>) -> Result<TypedMatrix, EngineError> {
    let k = EngineError::kernel;
    Ok(match e {
        Expr::Var(v) => env[v.as_str()].clone(),
        Expr::Attr(a) => view.attr_matrix(a)?,
        Expr::Dot(a, b) => {
            ops::compose(&eval(binding, a, view, env)?, &eval(binding, b, view, env)?).map_err(|s| k("dot", s))?
        }
        Expr::Krao(a, b) => {
            ops::krao(&eval(binding, a, view, env)?, &eval(binding, b, view, env)?).map_err(|s| k("krao", s))?
        }
        Expr::Tr(a) => ops::converse(&eval(binding, a, view, env)?),
        Expr::Sum(a) => match a.as_ref() {
            Expr::Krao(x, y) => {
                let (x, y) = (eval(binding, x, view, env)?, eval(binding, y, view, env)?);
                ops::krao_sum(&x, &y).map_err(|s| k("krao", s))?
            }
            a => ops::row_sum(&eval(binding, a, view, env)?),
        },
        Expr::Bool(a) => ops::booleanize(&eval(binding, a, view, env)?).map_err(|s| k("bool", s))?,
        Expr::Diag(a) => ops::diagonal(&eval(binding, a, view, env)?).map_err(|s| k("diag", s))?,
        Expr::Filter(p) => predicate::Compiled::new(binding, view, p)?.vector()?,
        Expr::Lift(s) => {
            let mut attrs = std::collections::BTreeSet::new();
            s.collect_attributes(&mut attrs);
            if attrs.is_empty() {
                lift::lift_vars(binding, s, env)?
            } else {
                lift::lift_rows(binding, view, s)?
            }
        }
        Expr::Having(m, op, t) => lift::having(binding, &eval(binding, m, view, env)?, *op, t, env)?,
    })
}
