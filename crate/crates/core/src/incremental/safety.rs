use std::collections::{BTreeMap, BTreeSet};

use super::IncrementalError;
use crate::dsl::{predicate_table, scalar_tables, Expr, Script};
use crate::encoding::AttrKind;
use crate::engine::EngineError;
use crate::ingestion::LoadedDatabase;

/// How a value depends on the rows of one appended table `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Dependence {
    /// Does not read `t`.
    Const,
    /// Columns range over `t`'s rows; column `i` reads only row `i`.
    ColLocal,
    /// Rows range over `t`'s rows; row `i` reads only row `i`.
    RowLocal,
    /// Square over `t`'s rows with cell `(i, i)` reading only row `i`.
    Diag,
    /// A sum over `t`'s rows of terms that each read one row.
    Additive,
}

use Dependence::*;

fn reject<T>(binding: &str, reason: impl Into<String>) -> Result<T, IncrementalError> {
    Err(IncrementalError::NotDeltaSafe { binding: binding.to_string(), reason: reason.into() })
}

fn dot(binding: &str, a: Dependence, b: Dependence) -> Result<Dependence, IncrementalError> {
    Ok(match (a, b) {
        (Const, Const) => Const,
        (Const, ColLocal | Diag) | (ColLocal, Diag) => ColLocal,
        (RowLocal | Diag, Const) | (Diag, RowLocal) => RowLocal,
        (Diag, Diag) => Diag,
        (Const, RowLocal) | (ColLocal, Const | RowLocal) => Additive,
        (Const, Additive) | (Additive, Const) => Additive,
        (RowLocal | Diag, ColLocal) => return reject(binding, "dot pairs every appended row with every other"),
        _ => return reject(binding, format!("dot of {a:?} and {b:?} terms is not linear in the appended rows")),
    })
}

fn krao(binding: &str, a: Dependence, b: Dependence) -> Result<Dependence, IncrementalError> {
    Ok(match (a, b) {
        (Const, Const) => Const,
        (Const | ColLocal | Diag, ColLocal | Diag) | (ColLocal | Diag, Const) => ColLocal,
        (Const, Additive) | (Additive, Const) => Additive,
        _ => return reject(binding, format!("krao of {a:?} and {b:?} terms is not linear in the appended rows")),
    })
}

struct Cx<'a> {
    db: &'a LoadedDatabase,
    table: &'a str,
    binding: &'a str,
    env: &'a BTreeMap<String, Dependence>,
}

impl Cx<'_> {
    fn expr(&self, e: &Expr) -> Result<Dependence, IncrementalError> {
        let b = self.binding;
        Ok(match e {
            Expr::Var(v) => self.env[v],
            Expr::Attr(a) => {
                let spec = self.db.attribute(a)?;
                match (spec.table == self.table, spec.kind) {
                    (false, _) => Const,
                    (true, AttrKind::PrimaryKey) => Diag,
                    (true, _) => ColLocal,
                }
            }
            Expr::Dot(x, y) => dot(b, self.expr(x)?, self.expr(y)?)?,
            Expr::Krao(x, y) => krao(b, self.expr(x)?, self.expr(y)?)?,
            Expr::Tr(x) => match self.expr(x)? {
                ColLocal => RowLocal,
                RowLocal => ColLocal,
                d => d,
            },
            Expr::Sum(x) => match self.expr(x)? {
                ColLocal => Additive,
                Diag => RowLocal,
                d => d,
            },
            Expr::Bool(x) => match self.expr(x)? {
                Additive => return reject(b, "bool of a sum over appended rows is not additive"),
                d => d,
            },
            Expr::Diag(x) => match self.expr(x)? {
                ColLocal | RowLocal => Diag,
                d => d,
            },
            Expr::Filter(p) => {
                let t = predicate_table(b, self.db, p).map_err(EngineError::from)?;
                if t == self.table {
                    ColLocal
                } else {
                    Const
                }
            }
            Expr::Lift(s) => {
                let mut vars = BTreeSet::new();
                s.collect_vars(&mut vars);
                if vars.is_empty() {
                    let ts = scalar_tables(b, self.db, s).map_err(EngineError::from)?;
                    if ts.contains(self.table) {
                        ColLocal
                    } else {
                        Const
                    }
                } else {
                    let deps: BTreeSet<Dependence> = vars.iter().map(|v| self.env[v]).collect();
                    match deps.into_iter().collect::<Vec<_>>()[..] {
                        [d] if d != Additive => d,
                        _ => return reject(b, "lift combines sums over appended rows non-linearly"),
                    }
                }
            }
            Expr::Having(m, _, t) => {
                let mut vars = BTreeSet::new();
                t.collect_vars(&mut vars);
                if self.expr(m)? != Const || vars.iter().any(|v| self.env[v] != Const) {
                    return reject(b, "having thresholds do not distribute over appended rows");
                }
                Const
            }
        })
    }
}

/// Dependence of every binding on appended rows of `table`.
pub fn dependence(
    script: &Script,
    db: &LoadedDatabase,
    table: &str,
) -> Result<Vec<(String, Dependence)>, IncrementalError> {
    let mut env = BTreeMap::new();
    let mut out = Vec::new();
    for bnd in &script.bindings {
        let d = Cx { db, table, binding: &bnd.name, env: &env }.expr(&bnd.expr)?;
        env.insert(bnd.name.clone(), d);
        out.push((bnd.name.clone(), d));
    }
    Ok(out)
}

/// Checks that appending to `appended` changes the script's result by a
/// sum over the new rows. Returns the appended table whose new rows must be
/// evaluated, or `None` when the result does not depend on them.
pub fn check_delta_safe(
    script: &Script,
    db: &LoadedDatabase,
    appended: &BTreeSet<String>,
) -> Result<Option<String>, IncrementalError> {
    let mut read = BTreeSet::new();
    for a in script.required_attributes() {
        read.insert(db.attribute(&a)?.table.clone());
    }
    let hit: Vec<&String> = appended.intersection(&read).collect();
    let result = script.result().map_or("", |b| b.name.as_str());
    match hit[..] {
        [] => Ok(None),
        [t] => {
            let deps = dependence(script, db, t)?;
            match deps.last().map(|d| d.1) {
                Some(Additive) => Ok(Some(t.clone())),
                Some(Const) | None => Ok(None),
                Some(d) => reject(
                    result,
                    format!("result is {d:?} in `{t}`: it keeps the appended rows instead of aggregating them"),
                ),
            }
        }
        _ => reject(
            result,
            format!(
                "rows are appended to {} tables the script reads ({}); cross terms need a full recomputation",
                hit.len(),
                hit.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            ),
        ),
    }
}
