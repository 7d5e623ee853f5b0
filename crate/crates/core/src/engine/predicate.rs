use std::borrow::Cow;
use std::cmp::Ordering;
use std::sync::Arc;

use chrono::NaiveDate;

use super::view::{RowSpan, View};
use super::EngineError;
use crate::dsl::{predicate_table, CmpOp, Literal, Predicate};
use crate::encoding::{parse_date, AttrKind, Dictionary, Label, ValueType};
use crate::sparse::TypedMatrix;

/// Comparable form of a label or literal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Key<'a> {
    Num(f64),
    Date(NaiveDate),
    Text(&'a str),
}

impl PartialOrd for Key<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Key::Num(a), Key::Num(b)) => a.partial_cmp(b),
            (Key::Date(a), Key::Date(b)) => a.partial_cmp(b),
            (Key::Text(a), Key::Text(b)) => a.partial_cmp(b),
            _ => None,
        }
    }
}

pub(crate) fn label_key(l: &Label) -> Key<'_> {
    match l {
        Label::Int(i) => Key::Num(*i as f64),
        Label::Dec(d) => Key::Num(d.0),
        Label::Date(d) => Key::Date(*d),
        Label::Text(s) => Key::Text(s),
    }
}

/// A literal read at the attribute's type; quoted dates become dates.
pub(crate) fn literal_key(lit: &Literal, ty: ValueType) -> Option<Key<'_>> {
    match (lit, ty) {
        (Literal::Num(n), _) => Some(Key::Num(*n)),
        (Literal::Date(d), _) => Some(Key::Date(*d)),
        (Literal::Str(s), ValueType::Date) => parse_date(s).map(Key::Date),
        (Literal::Str(s), _) => Some(Key::Text(s)),
    }
}

/// `%` matches any run of characters, including none.
pub fn like(text: &str, pattern: &str) -> bool {
    let parts: Vec<&str> = pattern.split('%').collect();
    if parts.len() == 1 {
        return text == pattern;
    }
    let (first, last) = (parts[0], parts[parts.len() - 1]);
    if !text.starts_with(first) {
        return false;
    }
    let mut rest = &text[first.len()..];
    for mid in &parts[1..parts.len() - 1] {
        match rest.find(mid) {
            Some(i) => rest = &rest[i + mid.len()..],
            None => return false,
        }
    }
    rest.len() >= last.len() && rest.ends_with(last)
}

/// Single-attribute test, applied either to dictionary labels or to raw measure values.
#[derive(Debug)]
pub(crate) enum Test<'p> {
    Cmp(CmpOp, Key<'p>),
    Between(Key<'p>, Key<'p>),
    In(Vec<Key<'p>>, bool),
    Like(&'p str, bool),
}

impl Test<'_> {
    pub fn matches(&self, k: Key<'_>) -> bool {
        match self {
            Test::Cmp(op, lit) => op.eval(&k, lit),
            Test::Between(lo, hi) => *lo <= k && k <= *hi,
            Test::In(vals, negated) => vals.contains(&k) != *negated,
            Test::Like(p, negated) => match k {
                Key::Text(t) => like(t, p) != *negated,
                _ => false,
            },
        }
    }
}

fn test_of<'p>(p: &'p Predicate, ty: ValueType) -> Test<'p> {
    let key = |l: &'p Literal| literal_key(l, ty).expect("literal checked against attribute type");
    match p {
        Predicate::Cmp { op, value, .. } => Test::Cmp(*op, key(value)),
        Predicate::Between { low, high, .. } => Test::Between(key(low), key(high)),
        Predicate::In { values, negated, .. } => Test::In(values.iter().map(key).collect(), *negated),
        Predicate::Like { pattern, negated, .. } => Test::Like(pattern, *negated),
        _ => unreachable!("not an atom"),
    }
}

/// Clears `out[i]` where `values[i]` fails the test, with the comparison chosen once per column.
fn scan_and(values: &[f64], test: &Test<'_>, out: &mut [bool]) {
    fn each(values: &[f64], out: &mut [bool], f: impl Fn(f64) -> bool) {
        for (o, &v) in out.iter_mut().zip(values) {
            *o &= f(v);
        }
    }
    match *test {
        Test::Cmp(op, Key::Num(l)) => match op {
            CmpOp::Eq => each(values, out, |v| v == l),
            CmpOp::Ne => each(values, out, |v| v != l),
            CmpOp::Lt => each(values, out, |v| v < l),
            CmpOp::Le => each(values, out, |v| v <= l),
            CmpOp::Gt => each(values, out, |v| v > l),
            CmpOp::Ge => each(values, out, |v| v >= l),
        },
        Test::Between(Key::Num(lo), Key::Num(hi)) => each(values, out, |v| (lo <= v) & (v <= hi)),
        _ => each(values, out, |v| test.matches(Key::Num(v))),
    }
}

/// One side of an attribute-to-attribute comparison.
enum Operand<'a> {
    Labels(Cow<'a, [u64]>, &'a Dictionary),
    Values(&'a [f64]),
}

impl Operand<'_> {
    fn key(&self, row: usize) -> Key<'_> {
        match self {
            Operand::Labels(codes, dict) => label_key(dict.label(codes[row]).expect("code in range")),
            Operand::Values(v) => Key::Num(v[row]),
        }
    }
}

enum Node<'a> {
    /// Dimension atom: a mask over the dictionary plus the per-row codes.
    Dim { attr: &'a str, mask: Vec<bool>, codes: Cow<'a, [u64]> },
    Measure { values: &'a [f64], test: Test<'a> },
    Pair { left: Operand<'a>, op: CmpOp, right: Operand<'a> },
    And(Box<Node<'a>>, Box<Node<'a>>),
    Or(Box<Node<'a>>, Box<Node<'a>>),
    Not(Box<Node<'a>>),
}

/// A predicate bound to one table of a view.
pub(crate) struct Compiled<'a> {
    view: &'a View<'a>,
    span: RowSpan,
    table: String,
    root: Node<'a>,
}

impl<'a> Compiled<'a> {
    pub fn new(binding: &str, view: &'a View<'a>, p: &'a Predicate) -> Result<Self, EngineError> {
        let table = predicate_table(binding, view.db(), p)?;
        let root = compile(view, p)?;
        Ok(Compiled { view, span: view.span(&table), table, root })
    }

    /// Truth value for every row of the span, live or not.
    pub fn span_bits(&self) -> Result<Vec<bool>, EngineError> {
        self.bits(&self.root)
    }

    /// Row vector `#t → 1` holding a one for every live row that satisfies the predicate.
    pub fn vector(&self) -> Result<TypedMatrix, EngineError> {
        let mut bits = self.bits(&self.root)?;
        let live = self.span.live();
        bits[..live.start as usize].fill(false);
        bits[live.end as usize..].fill(false);
        let values: Arc<[f64]> = bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Ok(TypedMatrix::dense_row(values, self.view.row_dim(&self.table)).expect("span matches row space"))
    }

    fn bits(&self, n: &Node<'a>) -> Result<Vec<bool>, EngineError> {
        let mut x = vec![true; self.span.len as usize];
        self.and_into(n, &mut x)?;
        Ok(x)
    }

    /// Clears the entries of `out` whose rows fail `n`.
    fn and_into(&self, n: &Node<'a>, out: &mut [bool]) -> Result<(), EngineError> {
        let (off, len) = (self.span.offset as usize, self.span.len as usize);
        match n {
            // the projection holds one entry per row, so composing the
            // dictionary mask with it reads one mask cell per row
            Node::Dim { mask, codes, .. } => {
                out.iter_mut().zip(&codes[off..off + len]).for_each(|(o, &c)| *o &= mask[c as usize]);
            }
            Node::Measure { values, test } => scan_and(&values[off..off + len], test, out),
            Node::Pair { left, op, right } => {
                out.iter_mut().zip(off..off + len).for_each(|(o, r)| *o &= op.eval(&left.key(r), &right.key(r)));
            }
            Node::And(a, b) => {
                self.and_into(a, out)?;
                self.and_into(b, out)?;
            }
            Node::Or(a, b) => {
                let mut x = self.bits(a)?;
                x.iter_mut().zip(self.bits(b)?).for_each(|(p, q)| *p |= q);
                out.iter_mut().zip(x).for_each(|(o, p)| *o &= p);
            }
            Node::Not(a) => {
                let x = self.bits(a)?;
                out.iter_mut().zip(x).for_each(|(o, p)| *o &= !p);
            }
        }
        Ok(())
    }
}

fn operand<'a>(view: &View<'a>, attr: &str) -> Result<Operand<'a>, EngineError> {
    let db = view.db();
    let a = view.attribute(attr)?;
    Ok(match a.kind {
        AttrKind::Measure => Operand::Values(db.measure_values(attr)?),
        _ => Operand::Labels(db.codes(attr)?, db.dictionary(&a.space).expect("loaded attribute has a dictionary")),
    })
}

/// Connectives over one dimension attribute combine on the dictionary mask.
fn fuse<'a>(x: Node<'a>, y: Node<'a>, and: bool) -> Node<'a> {
    match (x, y) {
        (Node::Dim { attr, mask, codes }, Node::Dim { attr: other, mask: m2, .. }) if attr == other => {
            let mask = mask.iter().zip(&m2).map(|(p, q)| if and { *p && *q } else { *p || *q }).collect();
            Node::Dim { attr, mask, codes }
        }
        (x, y) if and => Node::And(Box::new(x), Box::new(y)),
        (x, y) => Node::Or(Box::new(x), Box::new(y)),
    }
}

fn compile<'a>(view: &View<'a>, p: &'a Predicate) -> Result<Node<'a>, EngineError> {
    let db = view.db();
    Ok(match p {
        Predicate::And(a, b) => fuse(compile(view, a)?, compile(view, b)?, true),
        Predicate::Or(a, b) => fuse(compile(view, a)?, compile(view, b)?, false),
        Predicate::Not(a) => match compile(view, a)? {
            Node::Dim { attr, mask, codes } => Node::Dim { attr, mask: mask.into_iter().map(|m| !m).collect(), codes },
            n => Node::Not(Box::new(n)),
        },
        Predicate::CmpAttr { left, op, right } => {
            Node::Pair { left: operand(view, left)?, op: *op, right: operand(view, right)? }
        }
        Predicate::Cmp { attr, .. }
        | Predicate::Between { attr, .. }
        | Predicate::In { attr, .. }
        | Predicate::Like { attr, .. } => {
            let a = view.attribute(attr)?;
            let test = test_of(p, a.value_type);
            match a.kind {
                AttrKind::Measure => Node::Measure { values: db.measure_values(attr)?, test },
                _ => {
                    let dict = db.dictionary(&a.space).expect("loaded attribute has a dictionary");
                    let mask = dict.labels().map(|l| test.matches(label_key(l))).collect();
                    Node::Dim { attr, mask, codes: db.codes(attr)? }
                }
            }
        }
    })
}
