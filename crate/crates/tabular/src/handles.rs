//! Objects handed out to other runtimes, pinned by random 64-bit keys.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HandleError {
    #[error("handle belongs to runtime {found:#018x}, not this runtime ({expected:#018x})")]
    Foreign { expected: u64, found: u64 },
    #[error("stale handle {0:#018x}")]
    Stale(u64),
}

struct Entry<T> {
    object: Arc<T>,
    pins: u64,
}

/// Pinned objects by key. Registering an object that is already pinned
/// returns its existing key and adds a pin.
pub struct HandleTable<T> {
    runtime_id: u64,
    entries: RwLock<HashMap<u64, Entry<T>>>,
    by_object: Mutex<HashMap<usize, u64>>,
    rng: Mutex<ChaCha8Rng>,
}

impl<T> HandleTable<T> {
    pub fn new(runtime_id: u64, seed: Option<u64>) -> HandleTable<T> {
        let rng = match seed {
            Some(s) => ChaCha8Rng::seed_from_u64(s),
            None => ChaCha8Rng::from_entropy(),
        };
        HandleTable {
            runtime_id,
            entries: RwLock::new(HashMap::new()),
            by_object: Mutex::new(HashMap::new()),
            rng: Mutex::new(rng),
        }
    }

    pub fn runtime_id(&self) -> u64 {
        self.runtime_id
    }

    pub fn register(&self, object: Arc<T>) -> u64 {
        let addr = Arc::as_ptr(&object) as *const () as usize;
        let mut by_object = self.by_object.lock().unwrap_or_else(|p| p.into_inner());
        let mut entries = self.entries.write().unwrap_or_else(|p| p.into_inner());
        if let Some(key) = by_object.get(&addr) {
            entries.get_mut(key).expect("indexed entry").pins += 1;
            return *key;
        }
        let key = {
            let mut rng = self.rng.lock().unwrap_or_else(|p| p.into_inner());
            loop {
                let k = rng.next_u64();
                if k != 0 && !entries.contains_key(&k) {
                    break k;
                }
            }
        };
        entries.insert(key, Entry { object, pins: 1 });
        by_object.insert(addr, key);
        key
    }

    fn check_runtime(&self, runtime_id: u64) -> Result<(), HandleError> {
        if runtime_id == self.runtime_id {
            Ok(())
        } else {
            Err(HandleError::Foreign {
                expected: self.runtime_id,
                found: runtime_id,
            })
        }
    }

    /// The pinned object itself, not a copy.
    pub fn resolve(&self, key: u64, runtime_id: u64) -> Result<Arc<T>, HandleError> {
        self.check_runtime(runtime_id)?;
        self.entries
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(&key)
            .map(|e| e.object.clone())
            .ok_or(HandleError::Stale(key))
    }

    /// Drops one pin; the entry goes when the last pin does.
    pub fn release(&self, key: u64, runtime_id: u64) -> Result<(), HandleError> {
        self.check_runtime(runtime_id)?;
        let mut by_object = self.by_object.lock().unwrap_or_else(|p| p.into_inner());
        let mut entries = self.entries.write().unwrap_or_else(|p| p.into_inner());
        let entry = entries.get_mut(&key).ok_or(HandleError::Stale(key))?;
        entry.pins -= 1;
        if entry.pins == 0 {
            let e = entries.remove(&key).expect("present");
            by_object.remove(&(Arc::as_ptr(&e.object) as *const () as usize));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pins(&self, key: u64) -> u64 {
        self.entries
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(&key)
            .map_or(0, |e| e.pins)
    }

    pub fn clear(&self) {
        self.by_object.lock().unwrap_or_else(|p| p.into_inner()).clear();
        self.entries.write().unwrap_or_else(|p| p.into_inner()).clear();
    }
}
