use std::sync::Arc;

use metaffi_core::cdt::{CallableValue, Value};
use metaffi_core::plugin::XCallPtr;
use metaffi_core::types::TypeInfo;
use metaffi_core::xcall::{call_values, XCall};

use crate::{ApiError, Result, Xllr};

struct RuntimeInner {
    xllr: &'static Xllr,
    name: String,
}

impl Drop for RuntimeInner {
    fn drop(&mut self) {
        if let Err(e) = self.xllr.free_runtime_plugin(&self.name) {
            log::warn!("freeing runtime plugin '{}': {e}", self.name);
        }
    }
}

/// A loaded runtime plugin. The plugin is released when the last clone and
/// the last entity loaded through it are dropped.
#[derive(Clone)]
pub struct MetaFFIRuntime {
    inner: Arc<RuntimeInner>,
}

impl MetaFFIRuntime {
    pub fn new(name: &str) -> Result<MetaFFIRuntime> {
        let xllr = Xllr::get()?;
        xllr.load_runtime_plugin(name)?;
        Ok(MetaFFIRuntime {
            inner: Arc::new(RuntimeInner {
                xllr,
                name: name.to_string(),
            }),
        })
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn load_module(&self, module_path: &str) -> MetaFFIModule {
        MetaFFIModule {
            runtime: self.clone(),
            path: module_path.to_string(),
        }
    }

    /// Turns a callable token into an XCall owned by this runtime.
    ///
    /// # Safety
    /// `token` must be valid for the runtime's `make_callable`.
    pub unsafe fn make_callable(
        &self,
        token: *mut std::ffi::c_void,
        params: &[TypeInfo],
        rets: &[TypeInfo],
    ) -> Result<MetaFFIEntity> {
        let xcall = self.inner.xllr.make_callable(&self.inner.name, token, params, rets)?;
        Ok(MetaFFIEntity::new(self.clone(), xcall, params, rets))
    }
}

#[derive(Clone)]
pub struct MetaFFIModule {
    runtime: MetaFFIRuntime,
    path: String,
}

impl MetaFFIModule {
    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn runtime(&self) -> &MetaFFIRuntime {
        &self.runtime
    }

    pub fn load_entity(&self, function_path: &str, params: &[TypeInfo], rets: &[TypeInfo]) -> Result<MetaFFIEntity> {
        let rt = &self.runtime.inner;
        let xcall = rt.xllr.load_entity(&rt.name, &self.path, function_path, params, rets)?;
        Ok(MetaFFIEntity::new(self.runtime.clone(), xcall, params, rets))
    }
}

/// A foreign entity. The XCall is freed through its runtime on drop.
pub struct MetaFFIEntity {
    runtime: MetaFFIRuntime,
    xcall: XCallPtr,
    params: Vec<TypeInfo>,
    rets: Vec<TypeInfo>,
}

impl MetaFFIEntity {
    fn new(runtime: MetaFFIRuntime, xcall: XCallPtr, params: &[TypeInfo], rets: &[TypeInfo]) -> MetaFFIEntity {
        MetaFFIEntity {
            runtime,
            xcall,
            params: params.to_vec(),
            rets: rets.to_vec(),
        }
    }

    pub fn params(&self) -> &[TypeInfo] {
        &self.params
    }

    pub fn rets(&self) -> &[TypeInfo] {
        &self.rets
    }

    pub fn xcall(&self) -> XCall {
        unsafe { self.xcall.get() }
    }

    /// The entity as a callable argument for other foreign calls.
    pub fn as_callable(&self) -> CallableValue {
        CallableValue {
            xcall: self.xcall(),
            parameter_types: self.params.iter().map(|t| t.ty).collect(),
            retval_types: self.rets.iter().map(|t| t.ty).collect(),
        }
    }

    /// Validates `args` against the loaded signature, then calls.
    pub fn call(&self, args: &[Value]) -> Result<Vec<Value>> {
        if args.len() != self.params.len() {
            return Err(ApiError::Arity {
                expected: self.params.len(),
                got: args.len(),
            });
        }
        for (index, (a, t)) in args.iter().zip(&self.params).enumerate() {
            if !a.matches(t) {
                return Err(ApiError::ArgumentType {
                    index,
                    expected: t.to_string(),
                    got: a.type_tag().to_string(),
                });
            }
        }
        unsafe { call_values(&self.xcall(), args, self.rets.len()) }.map_err(|e| ApiError::Call(e.to_string()))
    }
}

impl Drop for MetaFFIEntity {
    fn drop(&mut self) {
        let rt = &self.runtime.inner;
        if let Err(e) = rt.xllr.free_xcall(&rt.name, XCallPtr(self.xcall.0)) {
            log::warn!("freeing xcall: {e}");
        }
    }
}
