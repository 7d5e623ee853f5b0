use std::collections::BTreeSet;

use crate::dsl::{parse, BinOp, CmpOp, Expr, Predicate, ScalarExpr};

fn var(name: &str) -> ScalarExpr {
    ScalarExpr::Var(name.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Agg {
    Sum(ScalarExpr),
    Count,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub name: String,
    pub agg: Agg,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JoinAtom {
    pub left: String,
    pub op: CmpOp,
    pub right: String,
}

/// Correlated sub-plan: an outer tuple qualifies when some inner tuple
/// matches it on every `(outer, inner)` attribute pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Exists {
    pub plan: Box<RelPlan>,
    pub correlation: Vec<(String, String)>,
    pub negated: bool,
}

/// Post-aggregation filter on group values.
#[derive(Clone, Debug, PartialEq)]
pub enum Having {
    Value { op: CmpOp, threshold: f64 },
    /// Compares against `fraction` times the sum over all groups.
    FractionOfTotal { op: CmpOp, fraction: f64 },
}

/// A select-join-group-aggregate query over decoded rows.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RelPlan {
    /// Nested-loop order, outermost first.
    pub tables: Vec<String>,
    pub joins: Vec<JoinAtom>,
    pub filters: Vec<Predicate>,
    pub group_by: Vec<String>,
    pub aggregates: Vec<Aggregate>,
    /// Combines aggregates (referenced as variables by name); defaults to the first aggregate.
    pub output: Option<ScalarExpr>,
    pub having: Option<Having>,
    pub exists: Option<Exists>,
}

/// Predicate in script syntax.
pub fn predicate(src: &str) -> Predicate {
    match parse(&format!("p = filter({src})")).expect("valid predicate").bindings.remove(0).expr {
        Expr::Filter(p) => p,
        _ => unreachable!(),
    }
}

/// Scalar expression over attributes, in script syntax.
pub fn scalar(src: &str) -> ScalarExpr {
    match parse(&format!("s = lift({src})")).expect("valid scalar expression").bindings.remove(0).expr {
        Expr::Lift(e) => e,
        _ => unreachable!(),
    }
}

impl RelPlan {
    /// Every attribute the plan reads, sub-plans included.
    pub fn attributes(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for j in &self.joins {
            out.insert(j.left.clone());
            out.insert(j.right.clone());
        }
        for f in &self.filters {
            f.collect_attributes(&mut out);
        }
        out.extend(self.group_by.iter().cloned());
        for a in &self.aggregates {
            if let Agg::Sum(e) = &a.agg {
                e.collect_attributes(&mut out);
            }
        }
        if let Some(x) = &self.exists {
            for (o, i) in &x.correlation {
                out.insert(o.clone());
                out.insert(i.clone());
            }
            out.extend(x.plan.attributes());
        }
        out
    }

    pub fn new(tables: &[&str]) -> Self {
        RelPlan { tables: tables.iter().map(|t| t.to_string()).collect(), ..Default::default() }
    }

    pub fn join(mut self, left: &str, right: &str) -> Self {
        self.joins.push(JoinAtom { left: left.into(), op: CmpOp::Eq, right: right.into() });
        self
    }

    pub fn filter(mut self, src: &str) -> Self {
        self.filters.push(predicate(src));
        self
    }

    pub fn group(mut self, attrs: &[&str]) -> Self {
        self.group_by = attrs.iter().map(|a| a.to_string()).collect();
        self
    }

    pub fn sum(mut self, name: &str, src: &str) -> Self {
        self.aggregates.push(Aggregate { name: name.into(), agg: Agg::Sum(scalar(src)) });
        self
    }

    pub fn count(mut self, name: &str) -> Self {
        self.aggregates.push(Aggregate { name: name.into(), agg: Agg::Count });
        self
    }

    pub fn output(mut self, e: ScalarExpr) -> Self {
        self.output = Some(e);
        self
    }

    pub fn having(mut self, h: Having) -> Self {
        self.having = Some(h);
        self
    }

    pub fn exists(mut self, plan: RelPlan, correlation: &[(&str, &str)]) -> Self {
        self.exists = Some(Exists {
            plan: Box::new(plan),
            correlation: correlation.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            negated: false,
        });
        self
    }
}

/// Reference plans for the bundled query scripts. Group keys follow the
/// component order of each script's result.
pub fn catalog(name: &str) -> Option<RelPlan> {
    let revenue = "l_extendedprice * (1 - l_discount)";
    Some(match name {
        "q3" => RelPlan::new(&["customer", "orders", "lineitem"])
            .join("c_custkey", "o_custkey")
            .join("o_orderkey", "l_orderkey")
            .filter("c_mktsegment = 'MACHINERY'")
            .filter("o_orderdate < '1995-03-10'")
            .filter("l_shipdate > '1995-03-10'")
            .group(&["l_orderkey", "o_orderdate", "o_shippriority"])
            .sum("revenue", revenue),
        "q4" => RelPlan::new(&["orders"])
            .filter("o_orderdate >= '1993-07-01' and o_orderdate < '1993-10-01'")
            .exists(RelPlan::new(&["lineitem"]).filter("l_commitdate < l_receiptdate"), &[("o_orderkey", "l_orderkey")])
            .group(&["o_orderpriority"])
            .count("order_count"),
        "q6" => RelPlan::new(&["lineitem"])
            .filter("l_shipdate >= '1994-01-01' and l_shipdate < '1995-01-01'")
            .filter("l_discount between 0.05 and 0.07")
            .filter("l_quantity < 24")
            .sum("revenue", "l_extendedprice * l_discount"),
        "q11" => RelPlan::new(&["nation", "supplier", "partsupp"])
            .join("n_nationkey", "s_nationkey")
            .join("s_suppkey", "ps_suppkey")
            .filter("n_name = 'GERMANY'")
            .group(&["ps_partkey"])
            .sum("value", "ps_supplycost * ps_availqty")
            .having(Having::FractionOfTotal { op: CmpOp::Gt, fraction: 0.01 }),
        "q12" | "q12_low" => {
            let high = "o_orderpriority = '1-URGENT' or o_orderpriority = '2-HIGH'";
            let cond = if name == "q12" { high.to_string() } else { format!("not ({high})") };
            RelPlan::new(&["lineitem", "orders"])
                .join("l_orderkey", "o_orderkey")
                .filter("l_shipmode in ('MAIL', 'SHIP')")
                .filter("l_commitdate < l_receiptdate")
                .filter("l_shipdate < l_commitdate")
                .filter("l_receiptdate >= '1994-01-01' and l_receiptdate < '1995-01-01'")
                .group(&["l_shipmode"])
                .sum("line_count", &format!("case when {cond} then 1 else 0 end"))
        }
        "q14" => RelPlan::new(&["lineitem", "part"])
            .join("l_partkey", "p_partkey")
            .filter("l_shipdate >= '1995-09-01' and l_shipdate < '1995-10-01'")
            .sum("num", &format!("case when p_type like 'PROMO%' then {revenue} else 0 end"))
            .sum("den", revenue)
            .output(ScalarExpr::Bin(
                BinOp::Div,
                Box::new(ScalarExpr::Bin(BinOp::Mul, Box::new(ScalarExpr::Num(100.0)), Box::new(var("num")))),
                Box::new(var("den")),
            )),
        _ => return None,
    })
}
