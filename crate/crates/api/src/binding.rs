//! Lazily loaded modules and entities, as used by generated host wrappers.

use std::sync::{Mutex, OnceLock};

use metaffi_core::cdt::Value;
use metaffi_core::types::{MetaFFIType, TypeInfo};

use crate::{ApiError, MetaFFIEntity, MetaFFIModule, MetaFFIRuntime, Result};

/// A `TypeInfo` that can live in a `static`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeSpec {
    pub ty: u64,
    pub alias: Option<&'static str>,
    pub dimensions: i64,
}

impl TypeSpec {
    pub const fn new(ty: u64, alias: Option<&'static str>, dimensions: i64) -> TypeSpec {
        TypeSpec { ty, alias, dimensions }
    }

    pub fn info(&self) -> TypeInfo {
        TypeInfo {
            ty: MetaFFIType(self.ty),
            alias: self.alias.map(str::to_string),
            dimensions: self.dimensions,
        }
    }
}

/// The runtime and module path a generated wrapper talks to. The runtime is
/// loaded on first use and kept for the life of the process.
pub struct ModuleBinding {
    runtime: &'static str,
    default_path: &'static str,
    path: Mutex<Option<String>>,
    module: OnceLock<MetaFFIModule>,
}

impl ModuleBinding {
    pub const fn new(runtime: &'static str, default_path: &'static str) -> ModuleBinding {
        ModuleBinding {
            runtime,
            default_path,
            path: Mutex::new(None),
            module: OnceLock::new(),
        }
    }

    pub fn runtime_name(&self) -> &'static str {
        self.runtime
    }

    /// Points the binding at `path` instead of the default. Only possible
    /// before the first call.
    pub fn bind(&self, path: &str) -> Result<()> {
        if let Some(m) = self.module.get() {
            if m.path() != path {
                return Err(ApiError::Xllr(format!("module already bound to {}", m.path())));
            }
        }
        *self.path.lock().unwrap_or_else(|p| p.into_inner()) = Some(path.to_string());
        Ok(())
    }

    pub fn module(&self) -> Result<&MetaFFIModule> {
        if let Some(m) = self.module.get() {
            return Ok(m);
        }
        let path = self
            .path
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .clone()
            .unwrap_or_else(|| self.default_path.to_string());
        let m = MetaFFIRuntime::new(self.runtime)?.load_module(&path);
        let _ = self.module.set(m);
        Ok(self.module.get().expect("just set"))
    }
}

/// One entity of a [`ModuleBinding`], loaded on first call.
pub struct EntitySlot {
    function_path: &'static str,
    params: &'static [TypeSpec],
    rets: &'static [TypeSpec],
    entity: OnceLock<MetaFFIEntity>,
}

impl EntitySlot {
    pub const fn new(function_path: &'static str, params: &'static [TypeSpec], rets: &'static [TypeSpec]) -> EntitySlot {
        EntitySlot {
            function_path,
            params,
            rets,
            entity: OnceLock::new(),
        }
    }

    pub fn function_path(&self) -> &'static str {
        self.function_path
    }

    pub fn get(&self, module: &ModuleBinding) -> Result<&MetaFFIEntity> {
        if let Some(e) = self.entity.get() {
            return Ok(e);
        }
        let params: Vec<TypeInfo> = self.params.iter().map(TypeSpec::info).collect();
        let rets: Vec<TypeInfo> = self.rets.iter().map(TypeSpec::info).collect();
        let e = module.module()?.load_entity(self.function_path, &params, &rets)?;
        let _ = self.entity.set(e);
        Ok(self.entity.get().expect("just set"))
    }

    pub fn call(&self, module: &ModuleBinding, args: Vec<Value>) -> Result<Vec<Value>> {
        self.get(module)?.call(&args)
    }
}
