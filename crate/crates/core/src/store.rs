use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::factors::UserRecord;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("user store: {0}")]
pub struct StoreError(pub String);

/// Read access to enrolled users.
pub trait UserStore {
    fn get(&self, username: &str) -> Result<Option<UserRecord>, StoreError>;
}

impl<S: UserStore + ?Sized> UserStore for &S {
    fn get(&self, username: &str) -> Result<Option<UserRecord>, StoreError> {
        (**self).get(username)
    }
}

/// In-memory store keyed by username.
#[derive(Debug, Clone, Default)]
pub struct MemoryStore {
    records: BTreeMap<String, UserRecord>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces the record for its username.
    pub fn put(&mut self, record: UserRecord) {
        self.records.insert(record.username().into(), record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl UserStore for MemoryStore {
    fn get(&self, username: &str) -> Result<Option<UserRecord>, StoreError> {
        Ok(self.records.get(username).cloned())
    }
}
