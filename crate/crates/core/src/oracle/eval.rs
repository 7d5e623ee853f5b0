use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use chrono::NaiveDate;

use super::plan::{Agg, Having, RelPlan};
use crate::dsl::{BinOp, CmpOp, Literal, Predicate, ScalarExpr};
use crate::encoding::{AttrKind, Label};
use crate::engine::{ResultRow, ResultTable};
use crate::ingestion::{LoadError, LoadedDatabase};

/// Compensated running sum (Neumaier's variant of Kahan summation).
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut n = Neumaier::default();
        for x in iter {
            n.add(x);
        }
        n
    }
}

/// A cell reference: (table position in the plan, column position).
type Slot = (usize, usize);

#[derive(Debug)]
enum Value {
    Label(Label),
    /// A literal that did not fit the attribute's type; compares as unordered.
    Invalid,
}

enum Pred {
    Cmp(Slot, CmpOp, Value),
    Pair(Slot, CmpOp, Slot),
    Between(Slot, Value, Value),
    In(Slot, Vec<Value>, bool),
    Like(Slot, Vec<u8>, bool),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
}

enum Scalar {
    Num(f64),
    Cell(Slot),
    Agg(usize),
    Neg(Box<Scalar>),
    Bin(BinOp, Box<Scalar>, Box<Scalar>),
    Case(Pred, Box<Scalar>, Box<Scalar>),
}

fn numeric(l: &Label) -> Option<f64> {
    match l {
        Label::Int(i) => Some(*i as f64),
        Label::Dec(d) => Some(d.0),
        _ => None,
    }
}

fn compare(a: &Label, b: &Label) -> Option<Ordering> {
    match (a, b) {
        (Label::Date(x), Label::Date(y)) => Some(x.cmp(y)),
        (Label::Text(x), Label::Text(y)) => Some(x.cmp(y)),
        _ => numeric(a)?.partial_cmp(&numeric(b)?),
    }
}

fn holds(op: CmpOp, ord: Option<Ordering>) -> bool {
    match ord {
        None => false,
        Some(o) => match op {
            CmpOp::Eq => o == Ordering::Equal,
            CmpOp::Ne => o != Ordering::Equal,
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Le => o != Ordering::Greater,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::Ge => o != Ordering::Less,
        },
    }
}

/// Backtracking `%` wildcard match.
fn wildcard(text: &[u8], pat: &[u8]) -> bool {
    match pat.split_first() {
        None => text.is_empty(),
        Some((b'%', rest)) => (0..=text.len()).any(|i| wildcard(&text[i..], rest)),
        Some((c, rest)) => text.first() == Some(c) && wildcard(&text[1..], rest),
    }
}

/// Decoded columns of the tables one plan reads.
struct Tables {
    names: Vec<String>,
    columns: Vec<Vec<Vec<Label>>>,
    slots: BTreeMap<String, Slot>,
    lens: Vec<usize>,
}

impl Tables {
    fn get(&self, (t, c): Slot, row: usize) -> &Label {
        &self.columns[t][c][row]
    }
}

fn decode(db: &LoadedDatabase, plan: &RelPlan, extra: &BTreeSet<String>) -> Result<Tables, LoadError> {
    let mut attrs = plan.attributes();
    attrs.extend(extra.iter().cloned());
    let mut t = Tables {
        names: plan.tables.clone(),
        columns: vec![Vec::new(); plan.tables.len()],
        slots: BTreeMap::new(),
        lens: plan.tables.iter().map(|n| db.row_count(n) as usize).collect(),
    };
    for a in attrs {
        let spec = db.attribute(&a)?;
        let Some(ti) = t.names.iter().position(|n| *n == spec.table) else { continue };
        let col: Vec<Label> = match spec.kind {
            AttrKind::Measure => db.measure_values(&a)?.iter().map(|&v| Label::Dec(v.into())).collect(),
            _ => {
                let dict = db.dictionary(&spec.space).expect("loaded attribute has a dictionary");
                db.codes(&a)?.iter().map(|&c| dict.label(c).expect("code in range").clone()).collect()
            }
        };
        t.slots.insert(a.clone(), (ti, t.columns[ti].len()));
        t.columns[ti].push(col);
    }
    Ok(t)
}

fn literal(lit: &Literal, like: &Label) -> Value {
    Value::Label(match (lit, like) {
        (Literal::Num(n), _) => Label::Dec((*n).into()),
        (Literal::Date(d), _) => Label::Date(*d),
        (Literal::Str(s), Label::Date(_)) => match NaiveDate::parse_from_str(s, "%Y-%m-%d") {
            Ok(d) => Label::Date(d),
            Err(_) => return Value::Invalid,
        },
        (Literal::Str(s), _) => Label::text(s),
    })
}

struct Compiler<'a> {
    t: &'a Tables,
    aggs: &'a [String],
}

impl Compiler<'_> {
    fn slot(&self, a: &str) -> Slot {
        self.t.slots[a]
    }

    /// A sample label from the slot's column, used to read literals at the right type.
    fn sample(&self, s: Slot) -> Label {
        self.t.columns[s.0][s.1].first().cloned().unwrap_or(Label::Int(0))
    }

    fn lit(&self, s: Slot, l: &Literal) -> Value {
        literal(l, &self.sample(s))
    }

    fn pred(&self, p: &Predicate) -> Pred {
        match p {
            Predicate::Cmp { attr, op, value } => {
                let s = self.slot(attr);
                Pred::Cmp(s, *op, self.lit(s, value))
            }
            Predicate::CmpAttr { left, op, right } => Pred::Pair(self.slot(left), *op, self.slot(right)),
            Predicate::Between { attr, low, high } => {
                let s = self.slot(attr);
                Pred::Between(s, self.lit(s, low), self.lit(s, high))
            }
            Predicate::In { attr, values, negated } => {
                let s = self.slot(attr);
                Pred::In(s, values.iter().map(|v| self.lit(s, v)).collect(), *negated)
            }
            Predicate::Like { attr, pattern, negated } => {
                Pred::Like(self.slot(attr), pattern.as_bytes().to_vec(), *negated)
            }
            Predicate::And(a, b) => Pred::And(Box::new(self.pred(a)), Box::new(self.pred(b))),
            Predicate::Or(a, b) => Pred::Or(Box::new(self.pred(a)), Box::new(self.pred(b))),
            Predicate::Not(a) => Pred::Not(Box::new(self.pred(a))),
        }
    }

    fn scalar(&self, e: &ScalarExpr) -> Scalar {
        match e {
            ScalarExpr::Num(n) => Scalar::Num(*n),
            ScalarExpr::Attr(a) => Scalar::Cell(self.slot(a)),
            ScalarExpr::Var(v) => Scalar::Agg(self.aggs.iter().position(|a| a == v).expect("aggregate name")),
            ScalarExpr::Neg(x) => Scalar::Neg(Box::new(self.scalar(x))),
            ScalarExpr::Bin(op, a, b) => Scalar::Bin(*op, Box::new(self.scalar(a)), Box::new(self.scalar(b))),
            ScalarExpr::Case { when, then, otherwise } => {
                Scalar::Case(self.pred(when), Box::new(self.scalar(then)), Box::new(self.scalar(otherwise)))
            }
        }
    }
}

fn value_cmp(op: CmpOp, l: &Label, v: &Value) -> bool {
    match v {
        Value::Label(x) => holds(op, compare(l, x)),
        Value::Invalid => false,
    }
}

fn eval_pred(p: &Pred, t: &Tables, tuple: &[usize]) -> bool {
    let cell = |s: Slot| t.get(s, tuple[s.0]);
    match p {
        Pred::Cmp(s, op, v) => value_cmp(*op, cell(*s), v),
        Pred::Pair(a, op, b) => holds(*op, compare(cell(*a), cell(*b))),
        Pred::Between(s, lo, hi) => value_cmp(CmpOp::Ge, cell(*s), lo) && value_cmp(CmpOp::Le, cell(*s), hi),
        Pred::In(s, vs, neg) => vs.iter().any(|v| value_cmp(CmpOp::Eq, cell(*s), v)) != *neg,
        Pred::Like(s, pat, neg) => match cell(*s) {
            Label::Text(x) => wildcard(x.as_bytes(), pat) != *neg,
            _ => false,
        },
        Pred::And(a, b) => eval_pred(a, t, tuple) && eval_pred(b, t, tuple),
        Pred::Or(a, b) => eval_pred(a, t, tuple) || eval_pred(b, t, tuple),
        Pred::Not(a) => !eval_pred(a, t, tuple),
    }
}

/// `None` on division by zero.
fn eval_scalar(e: &Scalar, t: &Tables, tuple: &[usize], aggs: &[f64]) -> Option<f64> {
    Some(match e {
        Scalar::Num(n) => *n,
        Scalar::Cell(s) => numeric(t.get(*s, tuple[s.0])).expect("numeric attribute"),
        Scalar::Agg(i) => aggs[*i],
        Scalar::Neg(x) => -eval_scalar(x, t, tuple, aggs)?,
        Scalar::Bin(op, a, b) => {
            let (x, y) = (eval_scalar(a, t, tuple, aggs)?, eval_scalar(b, t, tuple, aggs)?);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div if y == 0.0 => return None,
                BinOp::Div => x / y,
            }
        }
        Scalar::Case(p, a, b) => {
            if eval_pred(p, t, tuple) {
                eval_scalar(a, t, tuple, aggs)?
            } else {
                eval_scalar(b, t, tuple, aggs)?
            }
        }
    })
}

/// Tables, predicates and join atoms of one plan, ready for nested loops.
struct Prepared {
    tables: Tables,
    /// Per table: which stored rows pass that table's own filters.
    passes: Vec<Vec<bool>>,
    /// Join atoms and multi-table filters, keyed by the innermost table they need.
    checks: Vec<Vec<Pred>>,
}

fn tables_of(p: &Pred, out: &mut BTreeSet<usize>) {
    match p {
        Pred::Cmp(s, ..) | Pred::Between(s, ..) | Pred::In(s, ..) | Pred::Like(s, ..) => {
            out.insert(s.0);
        }
        Pred::Pair(a, _, b) => {
            out.insert(a.0);
            out.insert(b.0);
        }
        Pred::And(a, b) | Pred::Or(a, b) => {
            tables_of(a, out);
            tables_of(b, out);
        }
        Pred::Not(a) => tables_of(a, out),
    }
}

impl Prepared {
    fn new(db: &LoadedDatabase, plan: &RelPlan, extra: &BTreeSet<String>) -> Result<Self, LoadError> {
        let tables = decode(db, plan, extra)?;
        let n = plan.tables.len();
        let cx = Compiler { t: &tables, aggs: &[] };
        let mut single: Vec<Vec<Pred>> = (0..n).map(|_| Vec::new()).collect();
        let mut checks: Vec<Vec<Pred>> = (0..n).map(|_| Vec::new()).collect();
        let joins = plan.joins.iter().map(|j| Pred::Pair(cx.slot(&j.left), j.op, cx.slot(&j.right)));
        for p in plan.filters.iter().map(|f| cx.pred(f)).chain(joins) {
            let mut ts = BTreeSet::new();
            tables_of(&p, &mut ts);
            let last = *ts.iter().next_back().expect("predicate reads an attribute");
            if ts.len() == 1 {
                single[last].push(p);
            } else {
                checks[last].push(p);
            }
        }
        let mut passes = Vec::with_capacity(n);
        let mut tuple = vec![0usize; n];
        for (ti, preds) in single.iter().enumerate() {
            let mut v = Vec::with_capacity(tables.lens[ti]);
            for r in 0..tables.lens[ti] {
                tuple[ti] = r;
                v.push(preds.iter().all(|p| eval_pred(p, &tables, &tuple)));
            }
            passes.push(v);
        }
        Ok(Prepared { tables, passes, checks })
    }

    /// Visits every qualifying tuple of row indices, outermost table first.
    fn walk<F: FnMut(&[usize]) -> ControlFlow<()>>(&self, depth: usize, tuple: &mut Vec<usize>, f: &mut F) -> ControlFlow<()> {
        if depth == self.passes.len() {
            return f(tuple);
        }
        for r in 0..self.tables.lens[depth] {
            if !self.passes[depth][r] {
                continue;
            }
            tuple[depth] = r;
            if self.checks[depth].iter().all(|p| eval_pred(p, &self.tables, tuple)) {
                self.walk(depth + 1, tuple, f)?;
            }
        }
        ControlFlow::Continue(())
    }
}

/// Evaluates `plan` by nested loops over decoded rows.
pub fn eval_plan(plan: &RelPlan, db: &LoadedDatabase) -> Result<ResultTable, LoadError> {
    let outer_corr: BTreeSet<String> = plan.exists.iter().flat_map(|x| x.correlation.iter().map(|c| c.0.clone())).collect();
    let outer = Prepared::new(db, plan, &outer_corr)?;
    let names: Vec<String> = plan.aggregates.iter().map(|a| a.name.clone()).collect();
    let cx = Compiler { t: &outer.tables, aggs: &names };
    let group: Vec<Slot> = plan.group_by.iter().map(|g| cx.slot(g)).collect();
    let sums: Vec<Option<Scalar>> = plan
        .aggregates
        .iter()
        .map(|a| match &a.agg {
            Agg::Sum(e) => Some(cx.scalar(e)),
            Agg::Count => None,
        })
        .collect();
    let output = plan.output.as_ref().map(|e| cx.scalar(e));

    let inner = match &plan.exists {
        Some(x) => {
            let corr: BTreeSet<String> = x.correlation.iter().map(|c| c.1.clone()).collect();
            let p = Prepared::new(db, &x.plan, &corr)?;
            let pairs: Vec<(Slot, Slot)> =
                x.correlation.iter().map(|(o, i)| (outer.tables.slots[o], p.tables.slots[i])).collect();
            Some((p, pairs, x.negated))
        }
        None => None,
    };

    let mut groups: BTreeMap<Vec<Label>, Vec<Neumaier>> = BTreeMap::new();
    let mut tuple = vec![0usize; plan.tables.len()];
    let _ = outer.walk(0, &mut tuple, &mut |tup| {
        if let Some((p, pairs, negated)) = &inner {
            let mut itup = vec![0usize; p.passes.len()];
            let found = p
                .walk(0, &mut itup, &mut |it| {
                    let hit = pairs.iter().all(|(o, i)| outer.tables.get(*o, tup[o.0]) == p.tables.get(*i, it[i.0]));
                    if hit {
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                })
                .is_break();
            if found == *negated {
                return ControlFlow::Continue(());
            }
        }
        let key: Vec<Label> = group.iter().map(|s| outer.tables.get(*s, tup[s.0]).clone()).collect();
        let accs = groups.entry(key).or_insert_with(|| vec![Neumaier::default(); sums.len()]);
        for (acc, s) in accs.iter_mut().zip(&sums) {
            match s {
                Some(e) => acc.add(eval_scalar(e, &outer.tables, tup, &[]).expect("division by zero in aggregate")),
                None => acc.add(1.0),
            }
        }
        ControlFlow::Continue(())
    });

    let mut rows: Vec<ResultRow> = Vec::new();
    for (labels, accs) in groups {
        let vals: Vec<f64> = accs.iter().map(Neumaier::value).collect();
        let v = match &output {
            Some(e) => eval_scalar(e, &outer.tables, &tuple, &vals),
            None => vals.first().copied(),
        };
        if let Some(value) = v {
            rows.push(ResultRow { labels, value });
        }
    }
    if let Some(h) = &plan.having {
        let (op, threshold) = match h {
            Having::Value { op, threshold } => (*op, *threshold),
            Having::FractionOfTotal { op, fraction } => {
                (*op, fraction * rows.iter().map(|r| r.value).collect::<Neumaier>().value())
            }
        };
        rows.retain(|r| holds(op, r.value.partial_cmp(&threshold)));
    }
    rows.retain(|r| r.value != 0.0);
    Ok(ResultTable { columns: plan.group_by.clone(), rows })
}
