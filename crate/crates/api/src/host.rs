use std::ffi::{c_char, c_void};

use metaffi_core::cdt::{decode_all, encode_all, CallableValue, Cdt, Cdts, Value};
use metaffi_core::types::{MetaFFIType, TypeInfo};
use metaffi_core::xcall::{pair_parts, select_entrypoint, set_error, EntrypointKind, XCall};

use crate::{MetaFFIEntity, MetaFFIRuntime, Result};

type Body = dyn Fn(Vec<Value>) -> std::result::Result<Vec<Value>, String> + Send + Sync;

struct Inner {
    body: Box<Body>,
    params: Vec<MetaFFIType>,
    rets: Vec<MetaFFIType>,
}

/// A host closure exposed as an XCall, so guests can call back into the host.
/// Must outlive every XCall made from it.
pub struct HostFunction {
    inner: Box<Inner>,
}

unsafe fn invoke(ctx: *mut c_void, pcdts: Option<*mut Cdts>) -> std::result::Result<(), String> {
    let inner = &*(ctx as *const Inner);
    let (args, rets) = match pcdts {
        Some(p) => {
            let (params, rets) = pair_parts(p);
            (decode_all(params).map_err(|e| e.to_string())?, Some(rets))
        }
        None => (Vec::new(), None),
    };
    if args.len() != inner.params.len() {
        return Err(format!("host function takes {} arguments, got {}", inner.params.len(), args.len()));
    }
    let out = (inner.body)(args)?;
    if out.len() != inner.rets.len() {
        return Err(format!("host function returned {} values, {} declared", out.len(), inner.rets.len()));
    }
    if let Some(rets) = rets {
        encode_all(rets, &out).map_err(|e| e.to_string())?;
    }
    Ok(())
}

unsafe fn guarded(ctx: *mut c_void, pcdts: Option<*mut Cdts>, err: *mut *mut c_char) {
    let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| invoke(ctx, pcdts)))
        .unwrap_or_else(|_| Err("host function panicked".into()));
    if let Err(e) = r {
        set_error(err, &e);
    }
}

unsafe extern "C" fn with_buffer(ctx: *mut c_void, pcdts: *mut Cdts, err: *mut *mut c_char) {
    guarded(ctx, Some(pcdts), err)
}

unsafe extern "C" fn without_buffer(ctx: *mut c_void, err: *mut *mut c_char) {
    guarded(ctx, None, err)
}

impl HostFunction {
    pub fn new<F>(params: &[MetaFFIType], rets: &[MetaFFIType], body: F) -> HostFunction
    where
        F: Fn(Vec<Value>) -> std::result::Result<Vec<Value>, String> + Send + Sync + 'static,
    {
        HostFunction {
            inner: Box::new(Inner {
                body: Box::new(body),
                params: params.to_vec(),
                rets: rets.to_vec(),
            }),
        }
    }

    pub fn xcall(&self) -> XCall {
        let ctx = &*self.inner as *const Inner as *mut c_void;
        match select_entrypoint(self.inner.params.len(), self.inner.rets.len()) {
            EntrypointKind::NoParamsNoRet => XCall::without_params(without_buffer, ctx),
            _ => XCall::with_params(with_buffer, ctx),
        }
    }

    pub fn callable(&self) -> CallableValue {
        CallableValue {
            xcall: self.xcall(),
            parameter_types: self.inner.params.clone(),
            retval_types: self.inner.rets.clone(),
        }
    }

    /// Hands this function to `runtime` through `make_callable`.
    pub fn wrap(&self, runtime: &MetaFFIRuntime) -> Result<MetaFFIEntity> {
        let mut token = Cdt::from_value(&Value::Callable(self.callable())).map_err(|e| crate::ApiError::Call(e.to_string()))?;
        let params: Vec<TypeInfo> = self.inner.params.iter().map(|t| TypeInfo::new(*t)).collect();
        let rets: Vec<TypeInfo> = self.inner.rets.iter().map(|t| TypeInfo::new(*t)).collect();
        let r = unsafe { runtime.make_callable(&mut token as *mut Cdt as *mut c_void, &params, &rets) };
        unsafe { metaffi_core::cdt::deep_free_cdt(&mut token) };
        r
    }
}
