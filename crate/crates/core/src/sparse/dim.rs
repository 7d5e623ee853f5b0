use std::fmt;
use std::sync::Arc;

/// A label space: the source or target type of a typed matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// The singleton space `1`.
    Unit,
    /// A dictionary-backed label space (attribute values, shared keys).
    Labels(Arc<str>),
    /// Row indices of a table without a primary key.
    Rows(Arc<str>),
    /// Flattened Khatri-Rao product space; component order is the
    /// mixed-radix digit order (leftmost = most significant).
    Product(Arc<[Dimension]>),
}

/// A label space together with its current cardinality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dimension {
    space: Space,
    card: u64,
}

impl Dimension {
    pub fn unit() -> Self {
        Dimension { space: Space::Unit, card: 1 }
    }

    pub fn labels(id: &str, card: u64) -> Self {
        Dimension { space: Space::Labels(Arc::from(id)), card }
    }

    pub fn rows(table: &str, card: u64) -> Self {
        Dimension { space: Space::Rows(Arc::from(table)), card }
    }

    /// Product of two spaces, flattened and with unit factors removed, so
    /// that `(A×B)×C` and `A×(B×C)` share the index layout `(a·|B| + b)·|C| + c`.
    /// Returns `None` when the cardinality overflows 64 bits.
    pub fn product(left: &Dimension, right: &Dimension) -> Option<Dimension> {
        let card = left.card.checked_mul(right.card)?;
        let mut parts: Vec<Dimension> = Vec::new();
        for d in [left, right] {
            match &d.space {
                Space::Unit => {}
                Space::Product(ps) => parts.extend(ps.iter().cloned()),
                _ => parts.push(d.clone()),
            }
        }
        Some(match parts.len() {
            0 => Dimension::unit(),
            1 => parts.pop().unwrap(),
            _ => Dimension { space: Space::Product(parts.into()), card },
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn card(&self) -> u64 {
        self.card
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.space, Space::Unit)
    }

    /// Atomic components in digit order; empty for the unit space.
    pub fn components(&self) -> Vec<Dimension> {
        match &self.space {
            Space::Unit => Vec::new(),
            Space::Product(ps) => ps.to_vec(),
            _ => vec![self.clone()],
        }
    }

    /// Splits a flat index into per-component indices (inverse of the
    /// `j·q + k` layout).
    pub fn decode(&self, mut index: u64) -> Vec<u64> {
        let comps = self.components();
        let mut out = vec![0; comps.len()];
        for (slot, c) in out.iter_mut().zip(comps.iter()).rev() {
            *slot = index % c.card;
            index /= c.card;
        }
        out
    }

    /// Inverse of [`Dimension::decode`].
    pub fn encode(&self, digits: &[u64]) -> u64 {
        self.components()
            .iter()
            .zip(digits)
            .fold(0u64, |acc, (c, &d)| acc * c.card + d)
    }

    /// Same space with grown cardinalities; products are rebuilt component-wise.
    pub fn with_card(&self, card: u64) -> Dimension {
        Dimension { space: self.space.clone(), card }
    }

    pub fn with_components(comps: Vec<Dimension>) -> Option<Dimension> {
        comps
            .iter()
            .try_fold(Dimension::unit(), |acc, c| Dimension::product(&acc, c))
    }

    /// Two dimensions are conformable when both the space and the cardinality agree.
    pub fn conformable(&self, other: &Dimension) -> bool {
        self == other
    }

    /// Spaces agree, cardinalities may differ (used when re-aligning grown spaces).
    pub fn same_space_shape(&self, other: &Dimension) -> bool {
        match (&self.space, &other.space) {
            (Space::Product(a), Space::Product(b)) => {
                a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x.same_space_shape(y))
            }
            (a, b) => a == b,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.space {
            Space::Unit => write!(f, "1"),
            Space::Labels(id) => write!(f, "{id}[{}]", self.card),
            Space::Rows(t) => write!(f, "#{t}[{}]", self.card),
            Space::Product(ps) => {
                write!(f, "(")?;
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, "×")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}
