use std::collections::VecDeque;
use std::sync::Arc;

use super::{InteractError, ModelVersion};

pub const DEFAULT_HISTORY_DEPTH: usize = 50;

/// Bounded undo stack over immutable model versions. Version 0 is kept
/// separately and is never evicted.
#[derive(Debug, Clone)]
pub struct ModelHistory {
    base: Arc<ModelVersion>,
    past: VecDeque<Arc<ModelVersion>>,
    current: Arc<ModelVersion>,
    depth: usize,
}

impl ModelHistory {
    pub fn new(initial: ModelVersion) -> Self {
        Self::with_depth(initial, DEFAULT_HISTORY_DEPTH)
    }

    pub fn with_depth(initial: ModelVersion, depth: usize) -> Self {
        let base = Arc::new(initial);
        Self {
            current: base.clone(),
            base,
            past: VecDeque::new(),
            depth,
        }
    }

    pub fn base(&self) -> &Arc<ModelVersion> {
        &self.base
    }

    pub fn current(&self) -> &Arc<ModelVersion> {
        &self.current
    }

    /// Number of versions that `undo` can still restore.
    pub fn undo_depth(&self) -> usize {
        self.past.len()
    }

    pub fn push(&mut self, version: ModelVersion) {
        let prev = std::mem::replace(&mut self.current, Arc::new(version));
        self.past.push_back(prev);
        while self.past.len() > self.depth {
            self.past.pop_front();
        }
    }

    pub fn undo(&mut self) -> Result<Arc<ModelVersion>, InteractError> {
        let prev = self.past.pop_back().ok_or(InteractError::EmptyHistory)?;
        self.current = prev;
        Ok(self.current.clone())
    }
}
