//! The runtime-plugin registry behind the XLLR API.

use std::collections::HashMap;
use std::ffi::c_void;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use thiserror::Error;

use crate::function_path::{FunctionPath, FunctionPathError};
use crate::plugin::{
    GuestError, LibraryDiscovery, PluginError, PluginKind, PluginSource, RuntimePlugin, XCallPtr,
};
use crate::types::TypeInfo;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XllrError {
    #[error(transparent)]
    Plugin(#[from] PluginError),
    #[error("runtime plugin '{0}' is not loaded")]
    NotLoaded(String),
    #[error("runtime plugin '{name}' has runtime_id {id:#x}, already used by '{other}'")]
    DuplicateRuntimeId { name: String, id: u64, other: String },
    #[error("invalid function path: {0}")]
    FunctionPath(#[from] FunctionPathError),
    #[error(transparent)]
    Guest(#[from] GuestError),
}

struct Entry {
    plugin: Arc<dyn RuntimePlugin>,
    refcount: usize,
    runtime_id: u64,
}

/// Loaded runtime plugins by name, reference counted.
///
/// Loads and frees are serialized by one lock; entity lookups only take the
/// read side of the table.
pub struct Registry {
    sources: Vec<Box<dyn PluginSource>>,
    lifecycle: Mutex<()>,
    loaded: RwLock<HashMap<String, Entry>>,
}

impl Registry {
    pub fn new(sources: Vec<Box<dyn PluginSource>>) -> Registry {
        Registry {
            sources,
            lifecycle: Mutex::new(()),
            loaded: RwLock::new(HashMap::new()),
        }
    }

    /// Discovers plugins under the plugin home.
    pub fn with_discovery() -> Registry {
        Registry::new(vec![Box::new(LibraryDiscovery::from_env())])
    }

    fn find(&self, name: &str) -> Result<Arc<dyn RuntimePlugin>, PluginError> {
        for source in &self.sources {
            if let Some(found) = source.runtime(name) {
                return found;
            }
        }
        Err(PluginError::NotFound {
            kind: PluginKind::Runtime,
            name: name.to_string(),
            path: "<no plugin source>".to_string(),
        })
    }

    pub fn load_runtime_plugin(&self, name: &str) -> Result<(), XllrError> {
        let _guard = self.lifecycle.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(e) = self.loaded.write().unwrap_or_else(|p| p.into_inner()).get_mut(name) {
            e.refcount += 1;
            return Ok(());
        }
        let plugin = self.find(name)?;
        let id = plugin.runtime_id();
        if let Some((other, _)) = self.read().iter().find(|(_, e)| e.runtime_id == id) {
            return Err(XllrError::DuplicateRuntimeId {
                name: name.to_string(),
                id,
                other: other.clone(),
            });
        }
        plugin.load_runtime()?;
        self.loaded.write().unwrap_or_else(|p| p.into_inner()).insert(
            name.to_string(),
            Entry {
                plugin,
                refcount: 1,
                runtime_id: id,
            },
        );
        log::debug!("loaded runtime plugin {name} (runtime_id {id:#x})");
        Ok(())
    }

    /// Drops one reference; the last one tears the runtime down.
    pub fn free_runtime_plugin(&self, name: &str) -> Result<(), XllrError> {
        let _guard = self.lifecycle.lock().unwrap_or_else(|p| p.into_inner());
        let entry = {
            let mut loaded = self.loaded.write().unwrap_or_else(|p| p.into_inner());
            let e = loaded
                .get_mut(name)
                .ok_or_else(|| XllrError::NotLoaded(name.to_string()))?;
            e.refcount -= 1;
            if e.refcount > 0 {
                return Ok(());
            }
            loaded.remove(name).expect("entry present")
        };
        let result = entry.plugin.free_runtime();
        drop(entry);
        log::debug!("unloaded runtime plugin {name}");
        result.map_err(XllrError::from)
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, HashMap<String, Entry>> {
        self.loaded.read().unwrap_or_else(|p| p.into_inner())
    }

    pub fn plugin(&self, name: &str) -> Result<Arc<dyn RuntimePlugin>, XllrError> {
        self.read()
            .get(name)
            .map(|e| e.plugin.clone())
            .ok_or_else(|| XllrError::NotLoaded(name.to_string()))
    }

    pub fn load_entity(
        &self,
        name: &str,
        module_path: &str,
        function_path: &str,
        params: &[TypeInfo],
        rets: &[TypeInfo],
    ) -> Result<XCallPtr, XllrError> {
        FunctionPath::parse(function_path)?;
        let plugin = self.plugin(name)?;
        Ok(plugin.load_entity(module_path, function_path, params, rets)?)
    }

    pub fn make_callable(
        &self,
        name: &str,
        token: *mut c_void,
        params: &[TypeInfo],
        rets: &[TypeInfo],
    ) -> Result<XCallPtr, XllrError> {
        Ok(self.plugin(name)?.make_callable(token, params, rets)?)
    }

    pub fn free_xcall(&self, name: &str, xcall: XCallPtr) -> Result<(), XllrError> {
        Ok(self.plugin(name)?.free_xcall(xcall)?)
    }

    pub fn is_loaded(&self, name: &str) -> bool {
        self.read().contains_key(name)
    }

    pub fn refcount(&self, name: &str) -> usize {
        self.read().get(name).map_or(0, |e| e.refcount)
    }

    pub fn len(&self) -> usize {
        self.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(name, runtime_id)` of every loaded plugin, sorted by name.
    pub fn runtime_ids(&self) -> Vec<(String, u64)> {
        let mut v: Vec<_> = self
            .read()
            .iter()
            .map(|(n, e)| (n.clone(), e.runtime_id))
            .collect();
        v.sort();
        v
    }
}

/// The process-wide registry, discovering plugins under the plugin home.
pub fn global() -> &'static Registry {
    static R: OnceLock<Registry> = OnceLock::new();
    R.get_or_init(Registry::with_discovery)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plugin::{GuestResult, StaticPlugins};
    use crate::xcall::XCall;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[derive(Default)]
    struct Probe {
        id: u64,
        fail_load: bool,
        loads: AtomicUsize,
        frees: AtomicUsize,
    }

    unsafe extern "C" fn nop(_: *mut c_void, _: *mut *mut std::ffi::c_char) {}

    impl RuntimePlugin for Probe {
        fn runtime_id(&self) -> u64 {
            self.id
        }
        fn load_runtime(&self) -> GuestResult<()> {
            if self.fail_load {
                return Err("init failed".into());
            }
            self.loads.fetch_add(1, Ordering::SeqCst);
            Ok(())
        }
        fn free_runtime(&self) -> GuestResult<()> {
            self.frees.fetch_add(1, Ordering::SeqCst);
            Ok(())
        }
        fn load_entity(&self, _: &str, fp: &str, _: &[TypeInfo], _: &[TypeInfo]) -> GuestResult<XCallPtr> {
            if fp == "callable=missing" {
                return Err("entity not found: missing".into());
            }
            Ok(XCallPtr(Box::into_raw(Box::new(XCall::without_params(nop, std::ptr::null_mut())))))
        }
        fn make_callable(&self, _: *mut c_void, _: &[TypeInfo], _: &[TypeInfo]) -> GuestResult<XCallPtr> {
            Err("not supported".into())
        }
        fn free_xcall(&self, x: XCallPtr) -> GuestResult<()> {
            drop(unsafe { Box::from_raw(x.0) });
            Ok(())
        }
    }

    fn registry(plugins: &[(&str, Arc<Probe>)]) -> Registry {
        let mut s = StaticPlugins::new();
        for (n, p) in plugins {
            s = s.with_runtime(n, p.clone());
        }
        Registry::new(vec![Box::new(s)])
    }

    fn probe(id: u64) -> Arc<Probe> {
        Arc::new(Probe { id, ..Default::default() })
    }

    #[test]
    fn load_free_refcount() {
        let p = probe(1);
        let r = registry(&[("a", p.clone())]);
        r.load_runtime_plugin("a").unwrap();
        assert_eq!(r.len(), 1);
        r.load_runtime_plugin("a").unwrap();
        r.free_runtime_plugin("a").unwrap();
        assert!(r.is_loaded("a"));
        r.free_runtime_plugin("a").unwrap();
        assert!(r.is_empty());
        assert_eq!(p.loads.load(Ordering::SeqCst), 1);
        assert_eq!(p.frees.load(Ordering::SeqCst), 1);
        assert!(matches!(r.free_runtime_plugin("a"), Err(XllrError::NotLoaded(_))));
    }

    #[test]
    fn unknown_plugin_names_the_name() {
        let r = registry(&[]);
        let e = r.load_runtime_plugin("no_such_plugin").unwrap_err();
        assert!(e.to_string().contains("no_such_plugin"));
        assert!(r.is_empty());
    }

    #[test]
    fn duplicate_runtime_id_rejected_without_trace() {
        let (a, b) = (probe(7), probe(7));
        let r = registry(&[("a", a), ("b", b.clone())]);
        r.load_runtime_plugin("a").unwrap();
        assert!(matches!(
            r.load_runtime_plugin("b"),
            Err(XllrError::DuplicateRuntimeId { .. })
        ));
        assert!(!r.is_loaded("b"));
        assert_eq!(b.loads.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn failed_init_leaves_no_trace() {
        let p = Arc::new(Probe { id: 3, fail_load: true, ..Default::default() });
        let r = registry(&[("bad", p)]);
        let e = r.load_runtime_plugin("bad").unwrap_err();
        assert_eq!(e.to_string(), "init failed");
        assert!(r.is_empty());
    }

    #[test]
    fn entity_calls_are_forwarded() {
        let r = registry(&[("a", probe(1))]);
        assert!(matches!(
            r.load_entity("a", "m", "callable=x", &[], &[]),
            Err(XllrError::NotLoaded(_))
        ));
        r.load_runtime_plugin("a").unwrap();
        let x = r.load_entity("a", "m", "callable=x", &[], &[]).unwrap();
        r.free_xcall("a", x).unwrap();
        let e = r.load_entity("a", "m", "callable=missing", &[], &[]).unwrap_err();
        assert_eq!(e.to_string(), "entity not found: missing");
        assert!(matches!(
            r.load_entity("a", "m", "callable=x,,y", &[], &[]),
            Err(XllrError::FunctionPath(_))
        ));
        r.free_runtime_plugin("a").unwrap();
    }

    #[test]
    fn concurrent_loads_initialize_once() {
        let p = probe(9);
        let r = Arc::new(registry(&[("a", p.clone())]));
        let threads: Vec<_> = (0..8)
            .map(|_| {
                let r = r.clone();
                std::thread::spawn(move || {
                    for _ in 0..50 {
                        r.load_runtime_plugin("a").unwrap();
                    }
                })
            })
            .collect();
        threads.into_iter().for_each(|t| t.join().unwrap());
        assert_eq!(r.refcount("a"), 400);
        for _ in 0..400 {
            r.free_runtime_plugin("a").unwrap();
        }
        assert_eq!(p.loads.load(Ordering::SeqCst), 1);
        assert_eq!(p.frees.load(Ordering::SeqCst), 1);
    }

    proptest::proptest! {
        #[test]
        fn interleavings_init_and_teardown_once(ops in proptest::collection::vec((0usize..3, proptest::bool::ANY), 0..60)) {
            let probes: Vec<_> = (0..3).map(|i| probe(100 + i as u64)).collect();
            let names = ["a", "b", "c"];
            let r = registry(&names.iter().copied().zip(probes.iter().cloned()).collect::<Vec<_>>());
            let mut model = [0usize; 3];
            let mut sessions = [0usize; 3];
            for (i, load) in ops {
                if load {
                    r.load_runtime_plugin(names[i]).unwrap();
                    if model[i] == 0 {
                        sessions[i] += 1;
                    }
                    model[i] += 1;
                } else if model[i] > 0 {
                    r.free_runtime_plugin(names[i]).unwrap();
                    model[i] -= 1;
                } else {
                    proptest::prop_assert!(r.free_runtime_plugin(names[i]).is_err());
                }
                let ids = r.runtime_ids();
                let mut distinct: Vec<_> = ids.iter().map(|(_, id)| *id).collect();
                distinct.dedup();
                proptest::prop_assert_eq!(distinct.len(), ids.len());
                proptest::prop_assert_eq!(r.refcount(names[i]), model[i]);
            }
            for (i, n) in names.iter().enumerate() {
                while model[i] > 0 {
                    r.free_runtime_plugin(n).unwrap();
                    model[i] -= 1;
                }
                let (l, f) = (probes[i].loads.load(Ordering::SeqCst), probes[i].frees.load(Ordering::SeqCst));
                proptest::prop_assert_eq!(l, sessions[i]);
                proptest::prop_assert_eq!(f, sessions[i]);
            }
        }
    }
}
