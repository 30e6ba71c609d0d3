//! Name-keyed registries of interchangeable strategies.
//!
//! Geometry builders, distance solvers and embedding weight schemes are each
//! looked up by a short name at runtime (from CLI flags or config files).

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

pub trait Named {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str {
        ""
    }
}

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Arc<T>>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Registers a strategy under its own name, replacing any previous entry.
    pub fn register(&mut self, strategy: Arc<T>) -> &mut Self {
        self.entries.insert(strategy.name(), strategy);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: self.kind,
            name: name.to_owned(),
            available: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<T>> {
        self.entries.values()
    }
}
