use std::collections::BTreeMap;

use crate::dsl::{type_of, Expr, MatrixType};
use crate::ingestion::LoadedDatabase;

/// Applies the pairing rules bottom-up until none fires:
///
/// * `dot(P, diag(v))` becomes `krao(v, P)`
/// * `dot(P, tr(krao(Q, v)))` becomes `dot(krao(v, P), tr(Q))`
/// * `dot(P, tr(v))` becomes `sum(krao(v, P))`
///
/// where `v` is a row vector. Expressions that do not typecheck are
/// returned unchanged.
pub fn rewrite(expr: &Expr, env: &BTreeMap<String, MatrixType>, db: &LoadedDatabase) -> Expr {
    let row_vector = |e: &Expr| type_of(e, env, db).is_ok_and(|t| t.rows.is_unit());
    let mut e = match expr {
        Expr::Krao(a, b) => Expr::Krao(Box::new(rewrite(a, env, db)), Box::new(rewrite(b, env, db))),
        Expr::Dot(a, b) => Expr::Dot(Box::new(rewrite(a, env, db)), Box::new(rewrite(b, env, db))),
        Expr::Tr(a) => Expr::Tr(Box::new(rewrite(a, env, db))),
        Expr::Sum(a) => Expr::Sum(Box::new(rewrite(a, env, db))),
        Expr::Bool(a) => Expr::Bool(Box::new(rewrite(a, env, db))),
        Expr::Diag(a) => Expr::Diag(Box::new(rewrite(a, env, db))),
        Expr::Having(m, op, t) => Expr::Having(Box::new(rewrite(m, env, db)), *op, t.clone()),
        other => other.clone(),
    };
    loop {
        let next = match &e {
            Expr::Dot(p, d) => match d.as_ref() {
                Expr::Diag(v) if row_vector(v) => Some(Expr::Krao(v.clone(), p.clone())),
                Expr::Tr(inner) => match inner.as_ref() {
                    Expr::Krao(q, v) if row_vector(v) => Some(Expr::Dot(
                        Box::new(Expr::Krao(v.clone(), p.clone())),
                        Box::new(Expr::Tr(q.clone())),
                    )),
                    v if row_vector(v) => {
                        Some(Expr::Sum(Box::new(Expr::Krao(Box::new(v.clone()), p.clone()))))
                    }
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        };
        match next {
            Some(n) => e = n,
            None => return e,
        }
    }
}
