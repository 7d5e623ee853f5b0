//! Nested-loop reference evaluation used to certify engine results.

mod compare;
mod eval;
mod plan;

pub use compare::{close, compare, Comparison, Divergence};
pub use eval::{eval_plan, Neumaier};
pub use plan::{catalog, predicate, scalar, Agg, Aggregate, Exists, Having, JoinAtom, RelPlan};
