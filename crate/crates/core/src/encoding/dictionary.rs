use std::sync::Arc;

use indexmap::IndexSet;

use super::{EncodingError, Label, ValueType};
use crate::sparse::Dimension;

/// Bijection between the labels of one space and the dense indices `0..len`.
/// Indices are handed out in first-seen order and never change.
#[derive(Clone, Debug)]
pub struct Dictionary {
    space: Arc<str>,
    value_type: ValueType,
    labels: IndexSet<Label>,
    frozen: bool,
}

impl Dictionary {
    pub fn new(space: &str, value_type: ValueType) -> Self {
        Dictionary { space: Arc::from(space), value_type, labels: IndexSet::new(), frozen: false }
    }

    pub fn space(&self) -> &str {
        &self.space
    }

    pub fn value_type(&self) -> ValueType {
        self.value_type
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dimension(&self) -> Dimension {
        Dimension::labels(&self.space, self.labels.len() as u64)
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn thaw(&mut self) {
        self.frozen = false;
    }

    pub fn intern(&mut self, label: Label) -> Result<u64, EncodingError> {
        if let Some(i) = self.labels.get_index_of(&label) {
            return Ok(i as u64);
        }
        if self.frozen {
            return Err(EncodingError::FrozenDictionary { space: self.space.to_string(), label: label.to_string() });
        }
        Ok(self.labels.insert_full(label).0 as u64)
    }

    pub fn index_of(&self, label: &Label) -> Option<u64> {
        self.labels.get_index_of(label).map(|i| i as u64)
    }

    pub fn label(&self, index: u64) -> Option<&Label> {
        self.labels.get_index(index as usize)
    }

    /// Labels in index order.
    pub fn labels(&self) -> impl ExactSizeIterator<Item = &Label> {
        self.labels.iter()
    }
}
