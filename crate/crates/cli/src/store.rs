//! In-memory session store keyed by the content hash of the spec text.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::ops::{self, Loaded, OpError};

/// Hex SHA-256 of `bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Job {
    Running,
    /// Serialized result, identical to the command-line output.
    Done(Arc<Vec<u8>>),
    Failed(String),
}

pub struct Entry {
    pub id: String,
    pub loaded: Loaded,
    /// Written once per key; `Running` is only ever replaced by a final state.
    jobs: Mutex<HashMap<String, Job>>,
    reductions: Mutex<HashMap<String, Arc<ops::Reduction>>>,
}

impl Entry {
    pub fn job(&self, key: &str) -> Option<Job> {
        self.jobs.lock().unwrap().get(key).cloned()
    }

    /// Registers `key` as running; false if it already exists.
    pub fn start_job(&self, key: &str) -> bool {
        let mut jobs = self.jobs.lock().unwrap();
        if jobs.contains_key(key) {
            return false;
        }
        jobs.insert(key.to_string(), Job::Running);
        true
    }

    pub fn finish_job(&self, key: &str, job: Job) {
        let mut jobs = self.jobs.lock().unwrap();
        if let Some(slot) = jobs.get_mut(key) {
            if *slot == Job::Running {
                *slot = job;
            }
        }
    }

    /// Cached reduction for `opts`.
    pub fn reduction(&self, opts: &ops::ReduceOptions) -> Result<Arc<ops::Reduction>, OpError> {
        let params = ops::reduction_params(&self.loaded, opts)?;
        let key = format!("{:?}", params);
        if let Some(r) = self.reductions.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let r = Arc::new(ops::run_reduce(&self.loaded, opts)?);
        Ok(self.reductions.lock().unwrap().entry(key).or_insert(r).clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StoreStats {
    pub models: usize,
    pub hits: u64,
    pub misses: u64,
}

#[derive(Default)]
pub struct SessionStore {
    models: RwLock<HashMap<String, Arc<Entry>>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads `text` unless a model with the same hash is stored. Returns the
    /// entry and whether it was a cache hit.
    pub fn insert(&self, text: &str) -> Result<(Arc<Entry>, bool), OpError> {
        let id = content_hash(text.as_bytes());
        if let Some(e) = self.get(&id) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok((e, true));
        }
        let loaded = ops::load("model", text)?;
        self.misses.fetch_add(1, Ordering::Relaxed);
        let entry = Arc::new(Entry {
            id: id.clone(),
            loaded,
            jobs: Mutex::new(HashMap::new()),
            reductions: Mutex::new(HashMap::new()),
        });
        let mut models = self.models.write().unwrap();
        Ok((models.entry(id).or_insert(entry).clone(), false))
    }

    pub fn get(&self, id: &str) -> Option<Arc<Entry>> {
        self.models.read().unwrap().get(id).cloned()
    }

    pub fn stats(&self) -> StoreStats {
        StoreStats {
            models: self.models.read().unwrap().len(),
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
        }
    }
}
