use std::collections::BTreeSet;
use std::fmt;

use chrono::NaiveDate;

#[derive(Clone, Debug, PartialEq)]
pub struct Script {
    pub bindings: Vec<Binding>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub name: String,
    pub expr: Expr,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var(String),
    Attr(String),
    Krao(Box<Expr>, Box<Expr>),
    Dot(Box<Expr>, Box<Expr>),
    Tr(Box<Expr>),
    Sum(Box<Expr>),
    Filter(Predicate),
    Lift(ScalarExpr),
    /// Every nonzero becomes one.
    Bool(Box<Expr>),
    /// Diagonal matrix of a vector.
    Diag(Box<Expr>),
    /// Keeps the entries whose value satisfies the comparison.
    Having(Box<Expr>, CmpOp, ScalarExpr),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn eval<T: PartialOrd>(self, a: &T, b: &T) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Str(String),
    Num(f64),
    Date(NaiveDate),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Predicate {
    Cmp { attr: String, op: CmpOp, value: Literal },
    /// Two attributes of the same table.
    CmpAttr { left: String, op: CmpOp, right: String },
    Between { attr: String, low: Literal, high: Literal },
    In { attr: String, values: Vec<Literal>, negated: bool },
    /// `%` is the only wildcard.
    Like { attr: String, pattern: String, negated: bool },
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
        }
    }

    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScalarExpr {
    Num(f64),
    Attr(String),
    Var(String),
    Neg(Box<ScalarExpr>),
    Bin(BinOp, Box<ScalarExpr>, Box<ScalarExpr>),
    Case { when: Predicate, then: Box<ScalarExpr>, otherwise: Box<ScalarExpr> },
}

impl Script {
    pub fn result(&self) -> Option<&Binding> {
        self.bindings.last()
    }

    /// Every attribute the script reads.
    pub fn required_attributes(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for b in &self.bindings {
            b.expr.collect_attributes(&mut out);
        }
        out
    }
}

impl Expr {
    pub fn collect_attributes(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(_) => {}
            Expr::Attr(a) => {
                out.insert(a.clone());
            }
            Expr::Krao(a, b) | Expr::Dot(a, b) => {
                a.collect_attributes(out);
                b.collect_attributes(out);
            }
            Expr::Tr(a) | Expr::Sum(a) | Expr::Bool(a) | Expr::Diag(a) => a.collect_attributes(out),
            Expr::Filter(p) => p.collect_attributes(out),
            Expr::Lift(e) => e.collect_attributes(out),
            Expr::Having(m, _, e) => {
                m.collect_attributes(out);
                e.collect_attributes(out);
            }
        }
    }

    /// Variables referenced directly by this expression.
    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Attr(_) | Expr::Filter(_) => {}
            Expr::Krao(a, b) | Expr::Dot(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Tr(a) | Expr::Sum(a) | Expr::Bool(a) | Expr::Diag(a) => a.collect_vars(out),
            Expr::Lift(e) => e.collect_vars(out),
            Expr::Having(m, _, e) => {
                m.collect_vars(out);
                e.collect_vars(out);
            }
        }
    }
}

impl Predicate {
    pub fn collect_attributes(&self, out: &mut BTreeSet<String>) {
        match self {
            Predicate::Cmp { attr, .. }
            | Predicate::Between { attr, .. }
            | Predicate::In { attr, .. }
            | Predicate::Like { attr, .. } => {
                out.insert(attr.clone());
            }
            Predicate::CmpAttr { left, right, .. } => {
                out.insert(left.clone());
                out.insert(right.clone());
            }
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                a.collect_attributes(out);
                b.collect_attributes(out);
            }
            Predicate::Not(a) => a.collect_attributes(out),
        }
    }
}

impl ScalarExpr {
    pub fn collect_attributes(&self, out: &mut BTreeSet<String>) {
        match self {
            ScalarExpr::Num(_) | ScalarExpr::Var(_) => {}
            ScalarExpr::Attr(a) => {
                out.insert(a.clone());
            }
            ScalarExpr::Neg(e) => e.collect_attributes(out),
            ScalarExpr::Bin(_, a, b) => {
                a.collect_attributes(out);
                b.collect_attributes(out);
            }
            ScalarExpr::Case { when, then, otherwise } => {
                when.collect_attributes(out);
                then.collect_attributes(out);
                otherwise.collect_attributes(out);
            }
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            ScalarExpr::Num(_) | ScalarExpr::Attr(_) => {}
            ScalarExpr::Var(v) => {
                out.insert(v.clone());
            }
            ScalarExpr::Neg(e) => e.collect_vars(out),
            ScalarExpr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            ScalarExpr::Case { then, otherwise, .. } => {
                then.collect_vars(out);
                otherwise.collect_vars(out);
            }
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bindings {
            writeln!(f, "{} = {}", b.name, b.expr)?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) | Expr::Attr(v) => f.write_str(v),
            Expr::Krao(a, b) => write!(f, "krao({a}, {b})"),
            Expr::Dot(a, b) => write!(f, "dot({a}, {b})"),
            Expr::Tr(a) => write!(f, "tr({a})"),
            Expr::Sum(a) => write!(f, "sum({a})"),
            Expr::Bool(a) => write!(f, "bool({a})"),
            Expr::Diag(a) => write!(f, "diag({a})"),
            Expr::Filter(p) => write!(f, "filter({p})"),
            Expr::Lift(e) => write!(f, "lift({e})"),
            Expr::Having(m, op, e) => write!(f, "having({m} {} {e})", op.symbol()),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => write!(f, "'{}'", s.replace('\'', "''")),
            Literal::Num(n) => write!(f, "{n}"),
            Literal::Date(d) => write!(f, "date '{}'", d.format("%Y-%m-%d")),
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, p: &Predicate) -> fmt::Result {
    match p {
        Predicate::And(..) | Predicate::Or(..) => write!(f, "({p})"),
        _ => write!(f, "{p}"),
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Cmp { attr, op, value } => write!(f, "{attr} {} {value}", op.symbol()),
            Predicate::CmpAttr { left, op, right } => write!(f, "{left} {} {right}", op.symbol()),
            Predicate::Between { attr, low, high } => write!(f, "{attr} between {low} and {high}"),
            Predicate::In { attr, values, negated } => {
                write!(f, "{attr} {}in (", if *negated { "not " } else { "" })?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
            Predicate::Like { attr, pattern, negated } => write!(
                f,
                "{attr} {}like {}",
                if *negated { "not " } else { "" },
                Literal::Str(pattern.clone())
            ),
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                write_operand(f, a)?;
                f.write_str(if matches!(self, Predicate::And(..)) { " and " } else { " or " })?;
                write_operand(f, b)
            }
            Predicate::Not(a) => {
                f.write_str("not ")?;
                match a.as_ref() {
                    Predicate::Not(_) => write!(f, "({a})"),
                    _ => write_operand(f, a),
                }
            }
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atom = |e: &ScalarExpr| matches!(e, ScalarExpr::Num(_) | ScalarExpr::Attr(_) | ScalarExpr::Var(_));
        match self {
            ScalarExpr::Num(n) => write!(f, "{n}"),
            ScalarExpr::Attr(a) | ScalarExpr::Var(a) => f.write_str(a),
            ScalarExpr::Neg(e) if atom(e) => write!(f, "-{e}"),
            ScalarExpr::Neg(e) => write!(f, "-({e})"),
            ScalarExpr::Bin(op, a, b) => {
                for (i, e) in [a, b].into_iter().enumerate() {
                    if i == 1 {
                        write!(f, " {} ", op.symbol())?;
                    }
                    if atom(e) {
                        write!(f, "{e}")?;
                    } else {
                        write!(f, "({e})")?;
                    }
                }
                Ok(())
            }
            ScalarExpr::Case { when, then, otherwise } => {
                write!(f, "case when {when} then {then} else {otherwise} end")
            }
        }
    }
}
