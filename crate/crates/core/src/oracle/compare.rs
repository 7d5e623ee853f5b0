use std::collections::BTreeSet;
use std::fmt;

use crate::encoding::Label;
use crate::engine::ResultTable;

#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    pub labels: Vec<Label>,
    pub engine: f64,
    pub oracle: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    /// Distinct label tuples examined.
    pub checked: usize,
    pub divergence: Option<Divergence>,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.divergence.is_none()
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.divergence {
            None => write!(f, "match ({} cells)", self.checked),
            Some(d) => {
                let labels: Vec<String> = d.labels.iter().map(Label::to_string).collect();
                write!(f, "mismatch at ({}): engine {} vs oracle {}", labels.join(", "), d.engine, d.oracle)
            }
        }
    }
}

/// True when `a` and `b` agree within relative tolerance `tol`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Cell-wise comparison keyed by label tuple; a missing cell counts as zero.
pub fn compare(engine: &ResultTable, oracle: &ResultTable, tol: f64) -> Comparison {
    let (e, o) = (engine.to_map(), oracle.to_map());
    let keys: BTreeSet<&Vec<Label>> = e.keys().chain(o.keys()).collect();
    for k in &keys {
        let (x, y) = (e.get(*k).copied().unwrap_or(0.0), o.get(*k).copied().unwrap_or(0.0));
        if !close(x, y, tol) {
            return Comparison {
                checked: keys.len(),
                divergence: Some(Divergence { labels: (*k).clone(), engine: x, oracle: y }),
            };
        }
    }
    Comparison { checked: keys.len(), divergence: None }
}
