use std::ffi::{c_char, c_void, CString};
use std::path::{Path, PathBuf};
use std::ptr;
use std::sync::OnceLock;

use libloading::os::unix::{Library, RTLD_GLOBAL, RTLD_NOW};
use metaffi_core::abi::{MetaffiTypeInfo, TypeInfoArray};
use metaffi_core::cache::CacheIndices;
use metaffi_core::memory::{take_error, AllocStats};
use metaffi_core::plugin::{plugin_home, xllr_library_path, XCallPtr};
use metaffi_core::types::TypeInfo;
use metaffi_core::xcall::XCall;
use metaffi_core::xllr_api::{install, XllrApi};

use crate::{ApiError, Result};

type Err = *mut *mut c_char;
type NameFn = unsafe extern "C" fn(*const c_char, Err);
type LoadFunctionFn = unsafe extern "C" fn(
    *const c_char,
    *const c_char,
    *const c_char,
    *const MetaffiTypeInfo,
    i8,
    *const MetaffiTypeInfo,
    i8,
    Err,
) -> *mut XCall;
type MakeCallableFn =
    unsafe extern "C" fn(*const c_char, *mut c_void, *const MetaffiTypeInfo, i8, *const MetaffiTypeInfo, i8, Err) -> *mut XCall;
type FreeXCallFn = unsafe extern "C" fn(*const c_char, *mut XCall, Err);
type StatsFn = unsafe extern "C" fn(*mut AllocStats);
type IndicesFn = unsafe extern "C" fn(*mut CacheIndices);
type RefcountFn = unsafe extern "C" fn(*const c_char) -> u64;
type CountFn = unsafe extern "C" fn() -> u64;

/// The loaded XLLR library. It is never unloaded.
pub struct Xllr {
    path: PathBuf,
    library: Library,
    load_runtime_plugin: NameFn,
    free_runtime_plugin: NameFn,
    load_function: LoadFunctionFn,
    make_callable: MakeCallableFn,
    free_xcall: FreeXCallFn,
    alloc_stats: StatsFn,
    cache_indices: IndicesFn,
    refcount: RefcountFn,
    plugin_count: CountFn,
}

fn cstr(s: &str) -> Result<CString> {
    CString::new(s).map_err(|_| ApiError::Xllr(format!("'{s}' contains a NUL byte")))
}

fn types(infos: &[TypeInfo]) -> Result<TypeInfoArray> {
    TypeInfoArray::new(infos).map_err(ApiError::Xllr)
}

fn count(arr: &TypeInfoArray) -> Result<i8> {
    arr.count().map_err(ApiError::Xllr)
}

unsafe fn check(err: *mut c_char) -> Result<()> {
    match take_error(err) {
        Some(msg) => Err(ApiError::Xllr(msg)),
        None => Ok(()),
    }
}

impl Xllr {
    /// The process-wide XLLR from `$METAFFI_HOME`.
    pub fn get() -> Result<&'static Xllr> {
        static XLLR: OnceLock<Result<Xllr>> = OnceLock::new();
        XLLR.get_or_init(|| {
            Xllr::open(&xllr_library_path(&plugin_home()))
        })
        .as_ref()
        .map_err(Clone::clone)
    }

    fn open(path: &Path) -> Result<Xllr> {
        let shown = path.display().to_string();
        let library = unsafe { Library::open(Some(path), RTLD_NOW | RTLD_GLOBAL) }.map_err(|e| ApiError::Load {
            path: shown.clone(),
            message: e.to_string(),
        })?;
        macro_rules! sym {
            ($name:literal) => {
                *unsafe { library.get(concat!($name, "\0").as_bytes()) }.map_err(|_| ApiError::MissingSymbol {
                    path: shown.clone(),
                    symbol: $name.into(),
                })?
            };
        }
        let xllr = Xllr {
            load_runtime_plugin: sym!("load_runtime_plugin"),
            free_runtime_plugin: sym!("free_runtime_plugin"),
            load_function: sym!("load_function"),
            make_callable: sym!("make_callable"),
            free_xcall: sym!("free_xcall"),
            alloc_stats: sym!("xllr_alloc_stats"),
            cache_indices: sym!("xllr_cache_indices"),
            refcount: sym!("xllr_runtime_plugin_refcount"),
            plugin_count: sym!("xllr_runtime_plugin_count"),
            path: path.to_path_buf(),
            library,
        };
        let table = XllrApi::from_global_scope().ok_or_else(|| ApiError::Load {
            path: shown.clone(),
            message: "allocator symbols are not globally visible".into(),
        })?;
        install(table).map_err(|_| ApiError::AllocatorConflict)?;
        Ok(xllr)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Looks up any other export of the XLLR library.
    ///
    /// # Safety
    /// `T` must match the symbol's real type.
    pub unsafe fn symbol<T: Copy>(&self, name: &str) -> Option<T> {
        self.library.get::<T>(name.as_bytes()).ok().map(|s| *s)
    }

    pub fn load_runtime_plugin(&self, name: &str) -> Result<()> {
        let name = cstr(name)?;
        let mut err = ptr::null_mut();
        unsafe {
            (self.load_runtime_plugin)(name.as_ptr(), &mut err);
            check(err)
        }
    }

    pub fn free_runtime_plugin(&self, name: &str) -> Result<()> {
        let name = cstr(name)?;
        let mut err = ptr::null_mut();
        unsafe {
            (self.free_runtime_plugin)(name.as_ptr(), &mut err);
            check(err)
        }
    }

    pub fn load_entity(
        &self,
        runtime: &str,
        module_path: &str,
        function_path: &str,
        params: &[TypeInfo],
        rets: &[TypeInfo],
    ) -> Result<XCallPtr> {
        let (runtime, module_path, function_path) = (cstr(runtime)?, cstr(module_path)?, cstr(function_path)?);
        let (p, r) = (types(params)?, types(rets)?);
        let mut err = ptr::null_mut();
        let x = unsafe {
            (self.load_function)(
                runtime.as_ptr(),
                module_path.as_ptr(),
                function_path.as_ptr(),
                p.as_ptr(),
                count(&p)?,
                r.as_ptr(),
                count(&r)?,
                &mut err,
            )
        };
        unsafe { check(err)? };
        Ok(XCallPtr(x))
    }

    /// # Safety
    /// `token` must be valid for the named runtime's `make_callable`.
    pub unsafe fn make_callable(
        &self,
        runtime: &str,
        token: *mut c_void,
        params: &[TypeInfo],
        rets: &[TypeInfo],
    ) -> Result<XCallPtr> {
        let runtime = cstr(runtime)?;
        let (p, r) = (types(params)?, types(rets)?);
        let mut err = ptr::null_mut();
        let x = (self.make_callable)(runtime.as_ptr(), token, p.as_ptr(), count(&p)?, r.as_ptr(), count(&r)?, &mut err);
        check(err)?;
        Ok(XCallPtr(x))
    }

    pub fn free_xcall(&self, runtime: &str, xcall: XCallPtr) -> Result<()> {
        let runtime = cstr(runtime)?;
        let mut err = ptr::null_mut();
        unsafe {
            (self.free_xcall)(runtime.as_ptr(), xcall.0, &mut err);
            check(err)
        }
    }

    /// Allocator counters of the shared XLLR allocator.
    pub fn alloc_stats(&self) -> AllocStats {
        let mut s = AllocStats::default();
        unsafe { (self.alloc_stats)(&mut s) };
        s
    }

    /// CDTS cache positions of the calling thread.
    pub fn cache_indices(&self) -> CacheIndices {
        let mut c = CacheIndices::default();
        unsafe { (self.cache_indices)(&mut c) };
        c
    }

    pub fn runtime_refcount(&self, name: &str) -> u64 {
        match cstr(name) {
            Ok(n) => unsafe { (self.refcount)(n.as_ptr()) },
            Err(_) => 0,
        }
    }

    pub fn runtime_count(&self) -> u64 {
        unsafe { (self.plugin_count)() }
    }
}
