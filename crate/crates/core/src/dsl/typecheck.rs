use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::*;
use crate::encoding::{AttrKind, ValueType};
use crate::ingestion::LoadedDatabase;
use crate::sparse::Dimension;

/// Arrow type `cols → rows`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixType {
    pub rows: Dimension,
    pub cols: Dimension,
}

impl MatrixType {
    pub fn new(rows: Dimension, cols: Dimension) -> Self {
        MatrixType { rows, cols }
    }

    pub fn is_scalar(&self) -> bool {
        self.rows.is_unit() && self.cols.is_unit()
    }
}

impl fmt::Display for MatrixType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} → {}", self.cols, self.rows)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TypeError {
    #[error("`{binding}`: {op} cannot combine {left} with {right}")]
    Mismatch { binding: String, op: &'static str, left: Dimension, right: Dimension },
    #[error("`{binding}`: expression mixes tables `{first}` and `{second}`")]
    MixedTable { binding: String, first: String, second: String },
    #[error("`{binding}`: cannot resolve `{name}`: {reason}")]
    NameResolution { binding: String, name: String, reason: String },
    #[error("`{binding}`: {message}")]
    Invalid { binding: String, message: String },
}

/// Types of every binding, in script order.
#[derive(Clone, Debug, Default)]
pub struct Typed {
    pub bindings: Vec<(String, MatrixType)>,
}

impl Typed {
    pub fn get(&self, name: &str) -> Option<&MatrixType> {
        self.bindings.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn result(&self) -> Option<&MatrixType> {
        self.bindings.last().map(|(_, t)| t)
    }
}

pub fn typecheck(script: &Script, db: &LoadedDatabase) -> Result<Typed, TypeError> {
    let mut env: BTreeMap<String, MatrixType> = BTreeMap::new();
    let mut out = Typed::default();
    for b in &script.bindings {
        let cx = Cx { binding: &b.name, db, env: &env };
        let t = cx.expr(&b.expr)?;
        env.insert(b.name.clone(), t.clone());
        out.bindings.push((b.name.clone(), t));
    }
    Ok(out)
}

/// Type of a single expression given the types of the variables it reads.
pub fn type_of(expr: &Expr, env: &BTreeMap<String, MatrixType>, db: &LoadedDatabase) -> Result<MatrixType, TypeError> {
    Cx { binding: "", db, env }.expr(expr)
}

struct Cx<'a> {
    binding: &'a str,
    db: &'a LoadedDatabase,
    env: &'a BTreeMap<String, MatrixType>,
}

impl Cx<'_> {
    fn invalid<T>(&self, message: impl Into<String>) -> Result<T, TypeError> {
        Err(TypeError::Invalid { binding: self.binding.to_string(), message: message.into() })
    }

    fn mismatch<T>(&self, op: &'static str, left: &Dimension, right: &Dimension) -> Result<T, TypeError> {
        Err(TypeError::Mismatch { binding: self.binding.to_string(), op, left: left.clone(), right: right.clone() })
    }

    fn expr(&self, e: &Expr) -> Result<MatrixType, TypeError> {
        match e {
            Expr::Var(v) => self.env.get(v).cloned().ok_or_else(|| TypeError::NameResolution {
                binding: self.binding.to_string(),
                name: v.clone(),
                reason: "not bound".into(),
            }),
            Expr::Attr(a) => {
                let spec = resolve(self.binding, self.db, a)?;
                let table = self.db.row_dim(&spec.table);
                Ok(match spec.kind {
                    AttrKind::Measure => MatrixType::new(Dimension::unit(), table),
                    AttrKind::PrimaryKey => MatrixType::new(table.clone(), table),
                    _ => MatrixType::new(self.db.space_dim(&spec.space), table),
                })
            }
            Expr::Dot(a, b) => {
                let (ta, tb) = (self.expr(a)?, self.expr(b)?);
                if ta.cols != tb.rows {
                    return self.mismatch("dot", &ta.cols, &tb.rows);
                }
                Ok(MatrixType::new(ta.rows, tb.cols))
            }
            Expr::Krao(a, b) => {
                let (ta, tb) = (self.expr(a)?, self.expr(b)?);
                if ta.cols != tb.cols {
                    return self.mismatch("krao", &ta.cols, &tb.cols);
                }
                match Dimension::product(&ta.rows, &tb.rows) {
                    Some(rows) => Ok(MatrixType::new(rows, ta.cols)),
                    None => self.invalid(format!("product {} × {} is too large", ta.rows, tb.rows)),
                }
            }
            Expr::Tr(a) => {
                let t = self.expr(a)?;
                Ok(MatrixType::new(t.cols, t.rows))
            }
            Expr::Sum(a) => Ok(MatrixType::new(self.expr(a)?.rows, Dimension::unit())),
            Expr::Bool(a) => self.expr(a),
            Expr::Diag(a) => {
                let t = self.expr(a)?;
                let d = if t.rows.is_unit() {
                    t.cols
                } else if t.cols.is_unit() {
                    t.rows
                } else {
                    return self.invalid(format!("diag needs a vector, got {t}"));
                };
                Ok(MatrixType::new(d.clone(), d))
            }
            Expr::Filter(p) => {
                let table = predicate_table(self.binding, self.db, p)?;
                Ok(MatrixType::new(Dimension::unit(), self.db.row_dim(&table)))
            }
            Expr::Lift(s) => self.lift(s),
            Expr::Having(m, _, s) => {
                let t = self.expr(m)?;
                let mut attrs = BTreeSet::new();
                s.collect_attributes(&mut attrs);
                if let Some(a) = attrs.into_iter().next() {
                    return self.invalid(format!("having threshold cannot read attribute `{a}`"));
                }
                let mut vars = BTreeSet::new();
                s.collect_vars(&mut vars);
                for v in vars {
                    let vt = self.expr(&Expr::Var(v.clone()))?;
                    if !vt.is_scalar() {
                        return self.invalid(format!("having threshold `{v}` must be 1 → 1, got {vt}"));
                    }
                }
                Ok(t)
            }
        }
    }

    fn lift(&self, s: &ScalarExpr) -> Result<MatrixType, TypeError> {
        let mut vars = BTreeSet::new();
        s.collect_vars(&mut vars);
        let mut attrs = BTreeSet::new();
        s.collect_attributes(&mut attrs);
        match (vars.is_empty(), attrs.is_empty()) {
            (true, true) => self.invalid("lift needs at least one attribute or variable"),
            (false, false) => self.invalid("lift cannot mix attributes and variables"),
            (false, true) => {
                let mut ty: Option<MatrixType> = None;
                for v in &vars {
                    let t = self.expr(&Expr::Var(v.clone()))?;
                    match &ty {
                        None => ty = Some(t),
                        Some(prev) if prev.rows != t.rows => return self.mismatch("lift", &prev.rows, &t.rows),
                        Some(prev) if prev.cols != t.cols => return self.mismatch("lift", &prev.cols, &t.cols),
                        Some(_) => {}
                    }
                }
                Ok(ty.expect("at least one variable"))
            }
            (true, false) => {
                let tables = scalar_tables(self.binding, self.db, s)?;
                let table = single_table(self.binding, tables)?;
                Ok(MatrixType::new(Dimension::unit(), self.db.row_dim(&table)))
            }
        }
    }
}

fn resolve<'a>(
    binding: &str,
    db: &'a LoadedDatabase,
    name: &str,
) -> Result<&'a crate::ingestion::AttributeSpec, TypeError> {
    db.attribute(name).map_err(|e| TypeError::NameResolution {
        binding: binding.to_string(),
        name: name.to_string(),
        reason: e.to_string(),
    })
}

fn single_table(binding: &str, tables: BTreeSet<String>) -> Result<String, TypeError> {
    let mut it = tables.into_iter();
    let first = it.next().ok_or_else(|| TypeError::Invalid {
        binding: binding.to_string(),
        message: "expression references no attribute".into(),
    })?;
    if let Some(second) = it.next() {
        return Err(TypeError::MixedTable { binding: binding.to_string(), first, second });
    }
    Ok(first)
}

fn check_literal(binding: &str, attr: &str, ty: ValueType, lit: &Literal) -> Result<(), TypeError> {
    let ok = match (ty, lit) {
        (ValueType::Integer | ValueType::Decimal, Literal::Num(_)) => true,
        (ValueType::Date, Literal::Date(_)) => true,
        (ValueType::Date, Literal::Str(s)) => crate::encoding::parse_date(s).is_some(),
        (ValueType::String, Literal::Str(_)) => true,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(TypeError::Invalid {
            binding: binding.to_string(),
            message: format!("literal {lit} does not fit {ty} attribute `{attr}`"),
        })
    }
}

/// The single table a predicate ranges over, after validating every atom.
pub fn predicate_table(binding: &str, db: &LoadedDatabase, p: &Predicate) -> Result<String, TypeError> {
    let mut tables = BTreeSet::new();
    check_predicate(binding, db, p, &mut tables)?;
    single_table(binding, tables)
}

fn check_predicate(
    binding: &str,
    db: &LoadedDatabase,
    p: &Predicate,
    tables: &mut BTreeSet<String>,
) -> Result<(), TypeError> {
    let mut attr = |name: &str| -> Result<(AttrKind, ValueType), TypeError> {
        let a = resolve(binding, db, name)?;
        tables.insert(a.table.clone());
        Ok((a.kind, a.value_type))
    };
    match p {
        Predicate::Cmp { attr: a, value, .. } => {
            let (_, ty) = attr(a)?;
            check_literal(binding, a, ty, value)
        }
        Predicate::Between { attr: a, low, high } => {
            let (_, ty) = attr(a)?;
            check_literal(binding, a, ty, low)?;
            check_literal(binding, a, ty, high)
        }
        Predicate::In { attr: a, values, .. } => {
            let (_, ty) = attr(a)?;
            values.iter().try_for_each(|v| check_literal(binding, a, ty, v))
        }
        Predicate::Like { attr: a, .. } => {
            let (_, ty) = attr(a)?;
            if ty != ValueType::String {
                return Err(TypeError::Invalid {
                    binding: binding.to_string(),
                    message: format!("like needs a string attribute, `{a}` is {ty}"),
                });
            }
            Ok(())
        }
        Predicate::CmpAttr { left, right, .. } => {
            let (_, lt) = attr(left)?;
            let (_, rt) = attr(right)?;
            if lt != rt && !(lt.is_numeric() && rt.is_numeric()) {
                return Err(TypeError::Invalid {
                    binding: binding.to_string(),
                    message: format!("cannot compare {lt} `{left}` with {rt} `{right}`"),
                });
            }
            Ok(())
        }
        Predicate::And(a, b) | Predicate::Or(a, b) => {
            check_predicate(binding, db, a, tables)?;
            check_predicate(binding, db, b, tables)
        }
        Predicate::Not(a) => check_predicate(binding, db, a, tables),
    }
}

/// Tables read by a lifted expression. Arithmetic operands must be
/// measures; dimensions may only appear inside `case` conditions.
pub fn scalar_tables(binding: &str, db: &LoadedDatabase, s: &ScalarExpr) -> Result<BTreeSet<String>, TypeError> {
    let mut tables = BTreeSet::new();
    collect_scalar(binding, db, s, &mut tables)?;
    Ok(tables)
}

fn collect_scalar(
    binding: &str,
    db: &LoadedDatabase,
    s: &ScalarExpr,
    tables: &mut BTreeSet<String>,
) -> Result<(), TypeError> {
    match s {
        ScalarExpr::Num(_) | ScalarExpr::Var(_) => Ok(()),
        ScalarExpr::Attr(a) => {
            let spec = resolve(binding, db, a)?;
            if spec.kind != AttrKind::Measure {
                return Err(TypeError::Invalid {
                    binding: binding.to_string(),
                    message: format!("`{a}` is a {} attribute; lift reads measures", spec.kind),
                });
            }
            tables.insert(spec.table.clone());
            Ok(())
        }
        ScalarExpr::Neg(e) => collect_scalar(binding, db, e, tables),
        ScalarExpr::Bin(_, a, b) => {
            collect_scalar(binding, db, a, tables)?;
            collect_scalar(binding, db, b, tables)
        }
        ScalarExpr::Case { when, then, otherwise } => {
            check_predicate(binding, db, when, tables)?;
            collect_scalar(binding, db, then, tables)?;
            collect_scalar(binding, db, otherwise, tables)
        }
    }
}
