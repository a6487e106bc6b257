//! Native runtime: exported symbols of ordinary shared libraries as XCalls.
//!
//! Only signatures made of int64, float64 and string8 values are supported,
//! and only the shapes that have a pre-generated trampoline (see
//! `shapes.rs`). Strings are passed as NUL-terminated UTF-8 and returned
//! strings are copied; the library keeps ownership of what it returns.
//! Calls are as thread-safe as the target library.

use std::collections::{HashMap, HashSet};
use std::ffi::{c_char, c_void, CStr, CString};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, OnceLock};

use libloading::Library;
use metaffi_core::cdt::{decode_all, encode_all, Cdts, Value};
use metaffi_core::function_path::FunctionPath;
use metaffi_core::plugin::{GuestError, GuestResult, RuntimePlugin, XCallPtr};
use metaffi_core::types::{MetaFFIType, TypeInfo};
use metaffi_core::xcall::{pair_parts, select_entrypoint, set_error, EntrypointKind, XCall};

mod shapes {
    #![allow(dead_code)]
    include!("../shapes.rs");
}

pub use shapes::{param_shapes, MAX_ARITY, RETURN_KINDS};

pub const RUNTIME_ID: u64 = 0x1F84_C2D7_66A9_3B05;

#[derive(Debug, Clone, Copy)]
pub enum Arg {
    I(i64),
    F(f64),
    S(*const c_char),
}

impl Arg {
    fn i(&self) -> i64 {
        match *self {
            Arg::I(v) => v,
            _ => unreachable!("shape checked at load"),
        }
    }

    fn f(&self) -> f64 {
        match *self {
            Arg::F(v) => v,
            _ => unreachable!("shape checked at load"),
        }
    }

    fn s(&self) -> *const c_char {
        match *self {
            Arg::S(v) => v,
            _ => unreachable!("shape checked at load"),
        }
    }
}

pub enum Ret {
    N,
    I(i64),
    F(f64),
    S(*const c_char),
}

type Trampoline = unsafe fn(*const c_void, &[Arg]) -> Ret;

mod generated {
    #![allow(unused_variables, non_snake_case)]
    use super::{Arg, Ret, Trampoline};
    include!(concat!(env!("OUT_DIR"), "/trampolines.rs"));
}

use generated::TRAMPOLINES;

/// Direct typed calls into a library exporting the `shape_*` fixture
/// symbols, bypassing XCalls. A reference for differential tests.
#[cfg(feature = "oracle")]
pub mod oracle {
    #![allow(unused_variables, non_snake_case, clippy::all)]
    use std::ffi::{c_char, CStr, CString};

    use metaffi_core::cdt::Value;

    fn int(v: &Value) -> i64 {
        match v {
            Value::Int64(x) => *x,
            other => panic!("expected int64, got {other:?}"),
        }
    }

    fn float(v: &Value) -> f64 {
        match v {
            Value::Float64(x) => *x,
            other => panic!("expected float64, got {other:?}"),
        }
    }

    fn cstring(v: &Value) -> CString {
        CString::new(v.as_str().expect("string")).expect("no NUL")
    }

    unsafe fn owned(p: *const c_char) -> Value {
        Value::String8(CStr::from_ptr(p).to_string_lossy().into_owned())
    }

    include!(concat!(env!("OUT_DIR"), "/direct.rs"));
}

fn trampoline(shape: &str, ret: char) -> Option<Trampoline> {
    static TABLE: OnceLock<HashMap<(&'static str, char), Trampoline>> = OnceLock::new();
    TABLE
        .get_or_init(|| TRAMPOLINES.iter().map(|(s, r, t)| ((*s, *r), *t)).collect())
        .get(&(shape, ret))
        .copied()
}

fn kind(t: &TypeInfo, what: &str) -> GuestResult<char> {
    let k = match t.ty {
        MetaFFIType::INT64 => 'i',
        MetaFFIType::FLOAT64 => 'f',
        MetaFFIType::STRING8 => 's',
        other => {
            return Err(GuestError(format!(
                "unsupported signature: {what} has type {other} (supported: int64, float64, string8)"
            )))
        }
    };
    Ok(k)
}

/// Maps a requested signature onto a trampoline shape.
pub fn shape_of(params: &[TypeInfo], rets: &[TypeInfo]) -> GuestResult<(String, char)> {
    if params.len() > MAX_ARITY {
        return Err(GuestError(format!(
            "unsupported signature: arity {} exceeds the maximum of {MAX_ARITY}",
            params.len()
        )));
    }
    if rets.len() > 1 {
        return Err(GuestError(format!(
            "unsupported signature: {} return values, at most one is supported",
            rets.len()
        )));
    }
    let shape = params
        .iter()
        .enumerate()
        .map(|(i, t)| kind(t, &format!("parameter {i}")))
        .collect::<GuestResult<String>>()?;
    let ret = match rets.first() {
        Some(t) => kind(t, "return value")?,
        None => 'n',
    };
    if trampoline(&shape, ret).is_none() {
        return Err(GuestError(format!(
            "unsupported signature: shape ({shape}) -> {ret} has no trampoline"
        )));
    }
    Ok((shape, ret))
}

struct Context {
    symbol: *const c_void,
    trampoline: Trampoline,
    shape: String,
    _library: Arc<Library>,
}

struct State {
    loaded: AtomicBool,
    libraries: Mutex<HashMap<PathBuf, Arc<Library>>>,
    live: Mutex<HashSet<usize>>,
}

fn state() -> &'static State {
    static S: OnceLock<State> = OnceLock::new();
    S.get_or_init(|| State {
        loaded: AtomicBool::new(false),
        libraries: Mutex::new(HashMap::new()),
        live: Mutex::new(HashSet::new()),
    })
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

fn library(path: &str) -> GuestResult<Arc<Library>> {
    let key = PathBuf::from(path);
    let mut libs = lock(&state().libraries);
    if let Some(l) = libs.get(&key) {
        return Ok(l.clone());
    }
    let lib = unsafe { Library::new(&key) }.map_err(|e| GuestError(format!("cannot load {path}: {e}")))?;
    let lib = Arc::new(lib);
    libs.insert(key, lib.clone());
    Ok(lib)
}

unsafe fn invoke(ctx: &Context, pcdts: Option<*mut Cdts>) -> Result<(), String> {
    let (values, rets) = match pcdts {
        Some(p) => {
            let (params, rets) = pair_parts(p);
            (decode_all(params).map_err(|e| e.to_string())?, Some(rets))
        }
        None => (Vec::new(), None),
    };
    if values.len() != ctx.shape.len() {
        return Err(format!("expected {} arguments, got {}", ctx.shape.len(), values.len()));
    }
    let mut strings = Vec::new();
    let mut args = Vec::with_capacity(values.len());
    for (i, (v, k)) in values.iter().zip(ctx.shape.chars()).enumerate() {
        args.push(match (k, v) {
            ('i', Value::Int64(x)) => Arg::I(*x),
            ('f', Value::Float64(x)) => Arg::F(*x),
            ('s', Value::String8(s)) => {
                let c = CString::new(s.as_str()).map_err(|_| format!("argument {i}: string contains NUL"))?;
                let p = c.as_ptr();
                strings.push(c);
                Arg::S(p)
            }
            _ => return Err(format!("argument {i}: got {}", v.type_tag())),
        });
    }
    let out = match (ctx.trampoline)(ctx.symbol, &args) {
        Ret::N => None,
        Ret::I(v) => Some(Value::Int64(v)),
        Ret::F(v) => Some(Value::Float64(v)),
        Ret::S(p) if p.is_null() => return Err("native function returned a null string".into()),
        Ret::S(p) => Some(Value::String8(CStr::from_ptr(p).to_string_lossy().into_owned())),
    };
    drop(strings);
    if let (Some(rets), Some(v)) = (rets, out) {
        encode_all(rets, &[v]).map_err(|e| e.to_string())?;
    }
    Ok(())
}

unsafe fn dispatch(ctx: *mut c_void, pcdts: Option<*mut Cdts>, err: *mut *mut c_char) {
    let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| invoke(&*(ctx as *const Context), pcdts)))
        .unwrap_or_else(|_| Err("native call panicked".into()));
    if let Err(e) = r {
        set_error(err, &e);
    }
}

unsafe extern "C" fn xcall_params_ret(ctx: *mut c_void, pcdts: *mut Cdts, err: *mut *mut c_char) {
    dispatch(ctx, Some(pcdts), err)
}

unsafe extern "C" fn xcall_params_no_ret(ctx: *mut c_void, pcdts: *mut Cdts, err: *mut *mut c_char) {
    dispatch(ctx, Some(pcdts), err)
}

unsafe extern "C" fn xcall_no_params_ret(ctx: *mut c_void, pcdts: *mut Cdts, err: *mut *mut c_char) {
    dispatch(ctx, Some(pcdts), err)
}

unsafe extern "C" fn xcall_no_params_no_ret(ctx: *mut c_void, err: *mut *mut c_char) {
    dispatch(ctx, None, err)
}

unsafe fn drop_xcall(p: *mut XCall) {
    let x = Box::from_raw(p);
    drop(Box::from_raw(x.context() as *mut Context));
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NativeRuntime;

impl NativeRuntime {
    fn ensure_loaded(&self) -> GuestResult<()> {
        if state().loaded.load(Ordering::SeqCst) {
            Ok(())
        } else {
            Err(GuestError("native runtime is not loaded".into()))
        }
    }
}

impl RuntimePlugin for NativeRuntime {
    fn runtime_id(&self) -> u64 {
        RUNTIME_ID
    }

    fn load_runtime(&self) -> GuestResult<()> {
        state().loaded.store(true, Ordering::SeqCst);
        Ok(())
    }

    fn free_runtime(&self) -> GuestResult<()> {
        let s = state();
        if !s.loaded.swap(false, Ordering::SeqCst) {
            return Err(GuestError("native runtime is not loaded".into()));
        }
        for p in lock(&s.live).drain() {
            unsafe { drop_xcall(p as *mut XCall) };
        }
        lock(&s.libraries).clear();
        Ok(())
    }

    fn load_entity(&self, module_path: &str, function_path: &str, params: &[TypeInfo], rets: &[TypeInfo]) -> GuestResult<XCallPtr> {
        self.ensure_loaded()?;
        let fp = FunctionPath::parse(function_path).map_err(|e| GuestError(e.to_string()))?;
        let name = fp
            .get("callable")
            .ok_or_else(|| GuestError(format!("function path '{function_path}' has no 'callable' entry")))?;
        let (shape, ret) = shape_of(params, rets)?;
        let lib = library(module_path)?;
        let symbol = unsafe {
            let c = CString::new(name).map_err(|_| GuestError("symbol name contains NUL".into()))?;
            lib.get::<*const c_void>(c.as_bytes_with_nul())
                .map(|s| *s)
                .map_err(|_| GuestError(format!("symbol not found: {name} in {module_path}")))?
        };
        let trampoline = trampoline(&shape, ret).expect("checked by shape_of");
        let ctx = Box::into_raw(Box::new(Context {
            symbol,
            trampoline,
            shape,
            _library: lib,
        })) as *mut c_void;
        let xcall = match select_entrypoint(params.len(), rets.len()) {
            EntrypointKind::ParamsRet => XCall::with_params(xcall_params_ret, ctx),
            EntrypointKind::ParamsNoRet => XCall::with_params(xcall_params_no_ret, ctx),
            EntrypointKind::NoParamsRet => XCall::with_params(xcall_no_params_ret, ctx),
            EntrypointKind::NoParamsNoRet => XCall::without_params(xcall_no_params_no_ret, ctx),
        };
        let p = Box::into_raw(Box::new(xcall));
        lock(&state().live).insert(p as usize);
        Ok(XCallPtr(p))
    }

    fn make_callable(&self, _token: *mut c_void, _params: &[TypeInfo], _rets: &[TypeInfo]) -> GuestResult<XCallPtr> {
        Err(GuestError("native runtime does not support make_callable".into()))
    }

    fn free_xcall(&self, xcall: XCallPtr) -> GuestResult<()> {
        if xcall.is_null() {
            return Ok(());
        }
        if lock(&state().live).remove(&(xcall.0 as usize)) {
            unsafe { drop_xcall(xcall.0) };
            Ok(())
        } else {
            Err(GuestError("xcall was not created by the native runtime or was already freed".into()))
        }
    }
}
