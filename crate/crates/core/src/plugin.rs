//! Plugin interfaces, discovery and symbol binding.
//!
//! Every plugin kind is a trait. A plugin can be registered in-process
//! ([`StaticPlugins`]) or discovered as a dynamic library under the plugin
//! home ([`LibraryDiscovery`]); callers see the same trait object either way.
//! The `export_*_plugin!` macros turn a trait implementation into the C
//! symbol set a dynamic library must export.

use std::collections::HashMap;
use std::ffi::{c_char, c_int, c_void, CString};
use std::fmt;
use std::path::{Path, PathBuf};
use std::ptr;
use std::sync::{Arc, Mutex, OnceLock};

use libloading::Library;
use thiserror::Error;

use crate::abi::{IdlInputType, MetaffiTypeInfo, TypeInfoArray};
use crate::memory::take_error;
use crate::types::TypeInfo;
use crate::xcall::XCall;

/// Error text reported by a plugin.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct GuestError(pub String);

impl From<String> for GuestError {
    fn from(s: String) -> Self {
        GuestError(s)
    }
}

impl From<&str> for GuestError {
    fn from(s: &str) -> Self {
        GuestError(s.to_string())
    }
}

pub type GuestResult<T> = Result<T, GuestError>;

/// A plugin-owned XCall record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct XCallPtr(pub *mut XCall);

unsafe impl Send for XCallPtr {}
unsafe impl Sync for XCallPtr {}

impl XCallPtr {
    pub fn is_null(&self) -> bool {
        self.0.is_null()
    }

    /// # Safety
    /// The record must not have been freed.
    pub unsafe fn get(&self) -> XCall {
        *self.0
    }
}

pub trait RuntimePlugin: Send + Sync {
    /// Identifier stamped into every handle this runtime emits.
    fn runtime_id(&self) -> u64;
    fn load_runtime(&self) -> GuestResult<()>;
    fn free_runtime(&self) -> GuestResult<()>;
    fn load_entity(
        &self,
        module_path: &str,
        function_path: &str,
        params: &[TypeInfo],
        rets: &[TypeInfo],
    ) -> GuestResult<XCallPtr>;
    fn make_callable(
        &self,
        token: *mut c_void,
        params: &[TypeInfo],
        rets: &[TypeInfo],
    ) -> GuestResult<XCallPtr>;
    fn free_xcall(&self, xcall: XCallPtr) -> GuestResult<()>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdlInput<'a> {
    SourceCode(&'a str),
    Path(&'a str),
}

impl IdlInput<'_> {
    pub fn input_type(&self) -> IdlInputType {
        match self {
            IdlInput::SourceCode(_) => IdlInputType::SourceCode,
            IdlInput::Path(_) => IdlInputType::Path,
        }
    }

    pub fn data(&self) -> &str {
        match self {
            IdlInput::SourceCode(d) | IdlInput::Path(d) => d,
        }
    }
}

pub trait IdlPlugin: Send + Sync {
    fn init(&self) {}
    /// Returns the IDL as JSON.
    fn parse_idl(&self, input: IdlInput<'_>) -> GuestResult<String>;
}

pub trait CompilerPlugin: Send + Sync {
    fn init(&self) {}
    fn compile_to_guest(&self, idl_json: &str, output_path: &str, options: &str) -> GuestResult<()>;
    fn compile_from_host(&self, idl_json: &str, output_path: &str, options: &str) -> GuestResult<()>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PluginKind {
    Runtime,
    Idl,
    Compiler,
}

impl PluginKind {
    pub fn file_name(self, name: &str) -> String {
        let stem = match self {
            PluginKind::Runtime => format!("xllr.{name}"),
            PluginKind::Idl => format!("metaffi.idl.{name}"),
            PluginKind::Compiler => format!("metaffi.compiler.{name}"),
        };
        format!("{stem}{}", std::env::consts::DLL_SUFFIX)
    }
}

impl fmt::Display for PluginKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PluginKind::Runtime => "runtime",
            PluginKind::Idl => "IDL",
            PluginKind::Compiler => "compiler",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PluginError {
    #[error("{kind} plugin '{name}' not found (looked for {path})")]
    NotFound {
        kind: PluginKind,
        name: String,
        path: String,
    },
    #[error("failed to load {path}: {message}")]
    Load { path: String, message: String },
    #[error("{path} does not export required symbol '{symbol}'")]
    MissingSymbol { path: String, symbol: String },
    #[error(transparent)]
    Guest(#[from] GuestError),
}

pub const HOME_ENV: &str = "METAFFI_HOME";

/// Plugin directory: `$METAFFI_HOME`, else `plugins` next to the executable.
pub fn plugin_home() -> PathBuf {
    if let Some(home) = std::env::var_os(HOME_ENV).filter(|h| !h.is_empty()) {
        return PathBuf::from(home);
    }
    std::env::current_exe()
        .ok()
        .and_then(|exe| exe.parent().map(|d| d.join("plugins")))
        .unwrap_or_else(|| PathBuf::from("plugins"))
}

pub fn xllr_library_path(home: &Path) -> PathBuf {
    home.join(format!("xllr{}", std::env::consts::DLL_SUFFIX))
}

fn open_library(path: &Path) -> Result<Library, PluginError> {
    unsafe { Library::new(path) }.map_err(|e| PluginError::Load {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

macro_rules! bind {
    ($lib:expr, $path:expr, $name:literal) => {
        unsafe {
            *$lib
                .get(concat!($name, "\0").as_bytes())
                .map_err(|_| PluginError::MissingSymbol {
                    path: $path.display().to_string(),
                    symbol: $name.to_string(),
                })?
        }
    };
}

pub type RuntimeIdFn = unsafe extern "C" fn() -> u64;
pub type LifecycleFn = unsafe extern "C" fn(*mut *mut c_char);
pub type LoadEntityFn = unsafe extern "C" fn(
    *const c_char,
    *const c_char,
    *const MetaffiTypeInfo,
    i8,
    *const MetaffiTypeInfo,
    i8,
    *mut *mut c_char,
) -> *mut XCall;
pub type MakeCallableFn = unsafe extern "C" fn(
    *mut c_void,
    *const MetaffiTypeInfo,
    i8,
    *const MetaffiTypeInfo,
    i8,
    *mut *mut c_char,
) -> *mut XCall;
pub type FreeXCallFn = unsafe extern "C" fn(*mut XCall, *mut *mut c_char);
pub type InitFn = unsafe extern "C" fn();
pub type ParseIdlFn = unsafe extern "C" fn(c_int, *const c_char, *mut *mut c_char) -> *mut c_char;
pub type CompileFn =
    unsafe extern "C" fn(*const c_char, *const c_char, *const c_char, *mut *mut c_char);

fn c_string(s: &str, what: &str) -> GuestResult<CString> {
    CString::new(s).map_err(|_| GuestError(format!("{what} contains a NUL byte")))
}

/// Runs `f` with a fresh error slot and turns a non-null slot into an error.
fn with_err_slot<T>(f: impl FnOnce(*mut *mut c_char) -> T) -> GuestResult<T> {
    let mut err: *mut c_char = ptr::null_mut();
    let out = f(&mut err);
    match unsafe { take_error(err) } {
        Some(msg) => Err(GuestError(msg)),
        None => Ok(out),
    }
}

/// A runtime plugin bound from a dynamic library.
pub struct DynamicRuntimePlugin {
    path: PathBuf,
    id: u64,
    load_runtime: LifecycleFn,
    free_runtime: LifecycleFn,
    load_entity: LoadEntityFn,
    make_callable: MakeCallableFn,
    free_xcall: FreeXCallFn,
    // Dropped last: the function pointers above point into it.
    _lib: Library,
}

pub const RUNTIME_SYMBOLS: [&str; 6] = [
    "runtime_id",
    "load_runtime",
    "free_runtime",
    "load_entity",
    "make_callable",
    "free_xcall",
];

impl DynamicRuntimePlugin {
    /// Binds all symbols or none.
    pub fn open(path: &Path) -> Result<DynamicRuntimePlugin, PluginError> {
        let lib = open_library(path)?;
        let runtime_id: RuntimeIdFn = bind!(lib, path, "runtime_id");
        let load_runtime: LifecycleFn = bind!(lib, path, "load_runtime");
        let free_runtime: LifecycleFn = bind!(lib, path, "free_runtime");
        let load_entity: LoadEntityFn = bind!(lib, path, "load_entity");
        let make_callable: MakeCallableFn = bind!(lib, path, "make_callable");
        let free_xcall: FreeXCallFn = bind!(lib, path, "free_xcall");
        Ok(DynamicRuntimePlugin {
            path: path.to_path_buf(),
            id: unsafe { runtime_id() },
            load_runtime,
            free_runtime,
            load_entity,
            make_callable,
            free_xcall,
            _lib: lib,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn null_checked(p: *mut XCall) -> GuestResult<XCallPtr> {
    if p.is_null() {
        Err(GuestError("plugin returned a null XCall".into()))
    } else {
        Ok(XCallPtr(p))
    }
}

impl RuntimePlugin for DynamicRuntimePlugin {
    fn runtime_id(&self) -> u64 {
        self.id
    }

    fn load_runtime(&self) -> GuestResult<()> {
        with_err_slot(|err| unsafe { (self.load_runtime)(err) })
    }

    fn free_runtime(&self) -> GuestResult<()> {
        with_err_slot(|err| unsafe { (self.free_runtime)(err) })
    }

    fn load_entity(
        &self,
        module_path: &str,
        function_path: &str,
        params: &[TypeInfo],
        rets: &[TypeInfo],
    ) -> GuestResult<XCallPtr> {
        let module_path = c_string(module_path, "module path")?;
        let function_path = c_string(function_path, "function path")?;
        let p = TypeInfoArray::new(params)?;
        let r = TypeInfoArray::new(rets)?;
        let (pc, rc) = (p.count()?, r.count()?);
        let x = with_err_slot(|err| unsafe {
            (self.load_entity)(
                module_path.as_ptr(),
                function_path.as_ptr(),
                p.as_ptr(),
                pc,
                r.as_ptr(),
                rc,
                err,
            )
        })?;
        null_checked(x)
    }

    #[allow(clippy::not_unsafe_ptr_arg_deref)]
    fn make_callable(
        &self,
        token: *mut c_void,
        params: &[TypeInfo],
        rets: &[TypeInfo],
    ) -> GuestResult<XCallPtr> {
        let p = TypeInfoArray::new(params)?;
        let r = TypeInfoArray::new(rets)?;
        let (pc, rc) = (p.count()?, r.count()?);
        let x = with_err_slot(|err| unsafe {
            (self.make_callable)(token, p.as_ptr(), pc, r.as_ptr(), rc, err)
        })?;
        null_checked(x)
    }

    fn free_xcall(&self, xcall: XCallPtr) -> GuestResult<()> {
        with_err_slot(|err| unsafe { (self.free_xcall)(xcall.0, err) })
    }
}

/// An IDL plugin bound from a dynamic library.
pub struct DynamicIdlPlugin {
    init: InitFn,
    parse_idl: ParseIdlFn,
    _lib: Library,
}

impl DynamicIdlPlugin {
    pub fn open(path: &Path) -> Result<DynamicIdlPlugin, PluginError> {
        let lib = open_library(path)?;
        let init: InitFn = bind!(lib, path, "init");
        let parse_idl: ParseIdlFn = bind!(lib, path, "parse_idl");
        Ok(DynamicIdlPlugin {
            init,
            parse_idl,
            _lib: lib,
        })
    }
}

impl IdlPlugin for DynamicIdlPlugin {
    fn init(&self) {
        unsafe { (self.init)() }
    }

    fn parse_idl(&self, input: IdlInput<'_>) -> GuestResult<String> {
        let data = c_string(input.data(), "IDL input")?;
        let out = with_err_slot(|err| unsafe {
            (self.parse_idl)(input.input_type() as c_int, data.as_ptr(), err)
        })?;
        if out.is_null() {
            return Err(GuestError("parse_idl returned no IDL".into()));
        }
        let text = unsafe { take_error(out) }.unwrap_or_default();
        Ok(text)
    }
}

/// A compiler plugin bound from a dynamic library.
pub struct DynamicCompilerPlugin {
    init: InitFn,
    to_guest: CompileFn,
    from_host: CompileFn,
    _lib: Library,
}

impl DynamicCompilerPlugin {
    pub fn open(path: &Path) -> Result<DynamicCompilerPlugin, PluginError> {
        let lib = open_library(path)?;
        let init: InitFn = bind!(lib, path, "init");
        let to_guest: CompileFn = bind!(lib, path, "compile_to_guest");
        let from_host: CompileFn = bind!(lib, path, "compile_from_host");
        Ok(DynamicCompilerPlugin {
            init,
            to_guest,
            from_host,
            _lib: lib,
        })
    }

    fn compile(&self, f: CompileFn, idl: &str, out: &str, opts: &str) -> GuestResult<()> {
        let idl = c_string(idl, "IDL")?;
        let out = c_string(out, "output path")?;
        let opts = c_string(opts, "options")?;
        with_err_slot(|err| unsafe { f(idl.as_ptr(), out.as_ptr(), opts.as_ptr(), err) })
    }
}

impl CompilerPlugin for DynamicCompilerPlugin {
    fn init(&self) {
        unsafe { (self.init)() }
    }

    fn compile_to_guest(&self, idl_json: &str, output_path: &str, options: &str) -> GuestResult<()> {
        self.compile(self.to_guest, idl_json, output_path, options)
    }

    fn compile_from_host(&self, idl_json: &str, output_path: &str, options: &str) -> GuestResult<()> {
        self.compile(self.from_host, idl_json, output_path, options)
    }
}

/// Where plugins come from. Sources are consulted in registration order.
pub trait PluginSource: Send + Sync {
    fn runtime(&self, name: &str) -> Option<Result<Arc<dyn RuntimePlugin>, PluginError>>;
    fn idl(&self, name: &str) -> Option<Result<Arc<dyn IdlPlugin>, PluginError>>;
    fn compiler(&self, name: &str) -> Option<Result<Arc<dyn CompilerPlugin>, PluginError>>;
}

/// Plugins registered in-process by name.
#[derive(Default)]
pub struct StaticPlugins {
    runtimes: HashMap<String, Arc<dyn RuntimePlugin>>,
    idls: HashMap<String, Arc<dyn IdlPlugin>>,
    compilers: HashMap<String, Arc<dyn CompilerPlugin>>,
}

impl StaticPlugins {
    pub fn new() -> StaticPlugins {
        StaticPlugins::default()
    }

    pub fn with_runtime(mut self, name: &str, plugin: Arc<dyn RuntimePlugin>) -> Self {
        self.runtimes.insert(name.to_string(), plugin);
        self
    }

    pub fn with_idl(mut self, name: &str, plugin: Arc<dyn IdlPlugin>) -> Self {
        self.idls.insert(name.to_string(), plugin);
        self
    }

    pub fn with_compiler(mut self, name: &str, plugin: Arc<dyn CompilerPlugin>) -> Self {
        self.compilers.insert(name.to_string(), plugin);
        self
    }
}

impl PluginSource for StaticPlugins {
    fn runtime(&self, name: &str) -> Option<Result<Arc<dyn RuntimePlugin>, PluginError>> {
        self.runtimes.get(name).cloned().map(Ok)
    }

    fn idl(&self, name: &str) -> Option<Result<Arc<dyn IdlPlugin>, PluginError>> {
        self.idls.get(name).cloned().map(Ok)
    }

    fn compiler(&self, name: &str) -> Option<Result<Arc<dyn CompilerPlugin>, PluginError>> {
        self.compilers.get(name).cloned().map(Ok)
    }
}

/// Dynamic libraries under a plugin directory.
///
/// IDL and compiler libraries are opened once per process and their `init`
/// runs exactly once; runtime libraries are opened per load so they can be
/// unloaded when their last reference goes.
pub struct LibraryDiscovery {
    home: Option<PathBuf>,
}

type Cache<T> = Mutex<HashMap<PathBuf, Arc<T>>>;

fn idl_cache() -> &'static Cache<DynamicIdlPlugin> {
    static C: OnceLock<Cache<DynamicIdlPlugin>> = OnceLock::new();
    C.get_or_init(Default::default)
}

fn compiler_cache() -> &'static Cache<DynamicCompilerPlugin> {
    static C: OnceLock<Cache<DynamicCompilerPlugin>> = OnceLock::new();
    C.get_or_init(Default::default)
}

impl LibraryDiscovery {
    /// Resolves the plugin home on every lookup.
    pub fn from_env() -> LibraryDiscovery {
        LibraryDiscovery { home: None }
    }

    pub fn at(home: impl Into<PathBuf>) -> LibraryDiscovery {
        LibraryDiscovery {
            home: Some(home.into()),
        }
    }

    pub fn home(&self) -> PathBuf {
        self.home.clone().unwrap_or_else(plugin_home)
    }

    pub fn locate(&self, kind: PluginKind, name: &str) -> Result<PathBuf, PluginError> {
        let path = self.home().join(kind.file_name(name));
        if path.exists() {
            Ok(path)
        } else {
            Err(PluginError::NotFound {
                kind,
                name: name.to_string(),
                path: path.display().to_string(),
            })
        }
    }

    fn cached<T, U: ?Sized>(
        &self,
        cache: &Cache<T>,
        kind: PluginKind,
        name: &str,
        open: impl FnOnce(&Path) -> Result<T, PluginError>,
        init: impl FnOnce(&T),
        upcast: impl FnOnce(Arc<T>) -> Arc<U>,
    ) -> Result<Arc<U>, PluginError> {
        let path = self.locate(kind, name)?;
        let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(p) = guard.get(&path) {
            return Ok(upcast(p.clone()));
        }
        let plugin = Arc::new(open(&path)?);
        init(&plugin);
        guard.insert(path, plugin.clone());
        Ok(upcast(plugin))
    }
}

impl PluginSource for LibraryDiscovery {
    fn runtime(&self, name: &str) -> Option<Result<Arc<dyn RuntimePlugin>, PluginError>> {
        Some(
            self.locate(PluginKind::Runtime, name)
                .and_then(|p| DynamicRuntimePlugin::open(&p))
                .map(|p| Arc::new(p) as Arc<dyn RuntimePlugin>),
        )
    }

    fn idl(&self, name: &str) -> Option<Result<Arc<dyn IdlPlugin>, PluginError>> {
        Some(self.cached(
            idl_cache(),
            PluginKind::Idl,
            name,
            DynamicIdlPlugin::open,
            |p| p.init(),
            |p| p as Arc<dyn IdlPlugin>,
        ))
    }

    fn compiler(&self, name: &str) -> Option<Result<Arc<dyn CompilerPlugin>, PluginError>> {
        Some(self.cached(
            compiler_cache(),
            PluginKind::Compiler,
            name,
            DynamicCompilerPlugin::open,
            |p| p.init(),
            |p| p as Arc<dyn CompilerPlugin>,
        ))
    }
}

/// Support code for the export macros.
#[doc(hidden)]
pub mod export {
    use std::ffi::{c_char, c_int, c_void};
    use std::panic::{catch_unwind, AssertUnwindSafe};
    use std::ptr;

    use super::*;
    use crate::abi::{str_arg, type_infos_from_raw};
    use crate::memory::alloc_error;

    fn panic_text(p: Box<dyn std::any::Any + Send>) -> String {
        if let Some(s) = p.downcast_ref::<&str>() {
            format!("plugin panicked: {s}")
        } else if let Some(s) = p.downcast_ref::<String>() {
            format!("plugin panicked: {s}")
        } else {
            "plugin panicked".to_string()
        }
    }

    /// Runs `f`, reporting errors and panics through `out_err`.
    pub unsafe fn guard<T>(out_err: *mut *mut c_char, fallback: T, f: impl FnOnce() -> GuestResult<T>) -> T {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| Err(GuestError(panic_text(p))));
        match result {
            Ok(v) => v,
            Err(e) => {
                if !out_err.is_null() {
                    *out_err = alloc_error(&e.0);
                }
                fallback
            }
        }
    }

    pub unsafe fn load_runtime(p: &dyn RuntimePlugin, err: *mut *mut c_char) {
        guard(err, (), || p.load_runtime())
    }

    pub unsafe fn free_runtime(p: &dyn RuntimePlugin, err: *mut *mut c_char) {
        guard(err, (), || p.free_runtime())
    }

    #[allow(clippy::too_many_arguments)]
    pub unsafe fn load_entity(
        p: &dyn RuntimePlugin,
        module_path: *const c_char,
        function_path: *const c_char,
        params: *const MetaffiTypeInfo,
        params_count: i8,
        rets: *const MetaffiTypeInfo,
        rets_count: i8,
        err: *mut *mut c_char,
    ) -> *mut XCall {
        guard(err, ptr::null_mut(), || {
            let module_path = str_arg(module_path, "module path")?;
            let function_path = str_arg(function_path, "function path")?;
            let params = type_infos_from_raw(params, params_count)?;
            let rets = type_infos_from_raw(rets, rets_count)?;
            Ok(p.load_entity(module_path, function_path, &params, &rets)?.0)
        })
    }

    pub unsafe fn make_callable(
        p: &dyn RuntimePlugin,
        token: *mut c_void,
        params: *const MetaffiTypeInfo,
        params_count: i8,
        rets: *const MetaffiTypeInfo,
        rets_count: i8,
        err: *mut *mut c_char,
    ) -> *mut XCall {
        guard(err, ptr::null_mut(), || {
            let params = type_infos_from_raw(params, params_count)?;
            let rets = type_infos_from_raw(rets, rets_count)?;
            Ok(p.make_callable(token, &params, &rets)?.0)
        })
    }

    pub unsafe fn free_xcall(p: &dyn RuntimePlugin, xcall: *mut XCall, err: *mut *mut c_char) {
        guard(err, (), || p.free_xcall(XCallPtr(xcall)))
    }

    pub unsafe fn idl_init(p: &dyn IdlPlugin) {
        let _ = catch_unwind(AssertUnwindSafe(|| p.init()));
    }

    pub unsafe fn parse_idl(
        p: &dyn IdlPlugin,
        input_type: c_int,
        data: *const c_char,
        err: *mut *mut c_char,
    ) -> *mut c_char {
        guard(err, ptr::null_mut(), || {
            let data = str_arg(data, "IDL input")?;
            let input = match IdlInputType::from_raw(input_type) {
                Some(IdlInputType::SourceCode) => IdlInput::SourceCode(data),
                Some(IdlInputType::Path) => IdlInput::Path(data),
                None => return Err(GuestError(format!("unknown IDL input type {input_type}"))),
            };
            let json = p.parse_idl(input)?;
            Ok(alloc_error(&json))
        })
    }

    pub unsafe fn compiler_init(p: &dyn CompilerPlugin) {
        let _ = catch_unwind(AssertUnwindSafe(|| p.init()));
    }

    pub unsafe fn compile(
        err: *mut *mut c_char,
        idl: *const c_char,
        output_path: *const c_char,
        options: *const c_char,
        f: impl FnOnce(&str, &str, &str) -> GuestResult<()>,
    ) {
        guard(err, (), || {
            let idl = str_arg(idl, "IDL")?;
            let output_path = str_arg(output_path, "output path")?;
            let options = if options.is_null() { "" } else { str_arg(options, "options")? };
            f(idl, output_path, options)
        })
    }
}

/// Exports the runtime-plugin symbol set for a [`RuntimePlugin`] type.
///
/// ```ignore
/// metaffi_core::export_runtime_plugin!(MyRuntime, MyRuntime::new());
/// ```
#[macro_export]
macro_rules! export_runtime_plugin {
    ($ty:ty, $init:expr) => {
        fn __metaffi_runtime_plugin() -> &'static $ty {
            static PLUGIN: ::std::sync::OnceLock<$ty> = ::std::sync::OnceLock::new();
            PLUGIN.get_or_init(|| $init)
        }

        #[no_mangle]
        pub extern "C" fn runtime_id() -> u64 {
            $crate::plugin::RuntimePlugin::runtime_id(__metaffi_runtime_plugin())
        }

        #[no_mangle]
        pub unsafe extern "C" fn load_runtime(err: *mut *mut ::std::ffi::c_char) {
            $crate::plugin::export::load_runtime(__metaffi_runtime_plugin(), err)
        }

        #[no_mangle]
        pub unsafe extern "C" fn free_runtime(err: *mut *mut ::std::ffi::c_char) {
            $crate::plugin::export::free_runtime(__metaffi_runtime_plugin(), err)
        }

        #[no_mangle]
        pub unsafe extern "C" fn load_entity(
            module_path: *const ::std::ffi::c_char,
            function_path: *const ::std::ffi::c_char,
            params: *const $crate::abi::MetaffiTypeInfo,
            params_count: i8,
            rets: *const $crate::abi::MetaffiTypeInfo,
            rets_count: i8,
            err: *mut *mut ::std::ffi::c_char,
        ) -> *mut $crate::xcall::XCall {
            $crate::plugin::export::load_entity(
                __metaffi_runtime_plugin(),
                module_path,
                function_path,
                params,
                params_count,
                rets,
                rets_count,
                err,
            )
        }

        #[no_mangle]
        pub unsafe extern "C" fn make_callable(
            token: *mut ::std::ffi::c_void,
            params: *const $crate::abi::MetaffiTypeInfo,
            params_count: i8,
            rets: *const $crate::abi::MetaffiTypeInfo,
            rets_count: i8,
            err: *mut *mut ::std::ffi::c_char,
        ) -> *mut $crate::xcall::XCall {
            $crate::plugin::export::make_callable(
                __metaffi_runtime_plugin(),
                token,
                params,
                params_count,
                rets,
                rets_count,
                err,
            )
        }

        #[no_mangle]
        pub unsafe extern "C" fn free_xcall(
            pxcall: *mut $crate::xcall::XCall,
            err: *mut *mut ::std::ffi::c_char,
        ) {
            $crate::plugin::export::free_xcall(__metaffi_runtime_plugin(), pxcall, err)
        }
    };
}

/// Exports `init` and `parse_idl` for an [`IdlPlugin`] type.
#[macro_export]
macro_rules! export_idl_plugin {
    ($ty:ty, $init:expr) => {
        fn __metaffi_idl_plugin() -> &'static $ty {
            static PLUGIN: ::std::sync::OnceLock<$ty> = ::std::sync::OnceLock::new();
            PLUGIN.get_or_init(|| $init)
        }

        #[no_mangle]
        pub unsafe extern "C" fn init() {
            $crate::plugin::export::idl_init(__metaffi_idl_plugin())
        }

        #[no_mangle]
        pub unsafe extern "C" fn parse_idl(
            input_type: ::std::ffi::c_int,
            data: *const ::std::ffi::c_char,
            out_err: *mut *mut ::std::ffi::c_char,
        ) -> *mut ::std::ffi::c_char {
            $crate::plugin::export::parse_idl(__metaffi_idl_plugin(), input_type, data, out_err)
        }
    };
}

/// Exports `init`, `compile_to_guest` and `compile_from_host` for a
/// [`CompilerPlugin`] type.
#[macro_export]
macro_rules! export_compiler_plugin {
    ($ty:ty, $init:expr) => {
        fn __metaffi_compiler_plugin() -> &'static $ty {
            static PLUGIN: ::std::sync::OnceLock<$ty> = ::std::sync::OnceLock::new();
            PLUGIN.get_or_init(|| $init)
        }

        #[no_mangle]
        pub unsafe extern "C" fn init() {
            $crate::plugin::export::compiler_init(__metaffi_compiler_plugin())
        }

        #[no_mangle]
        pub unsafe extern "C" fn compile_to_guest(
            idl_def_json: *const ::std::ffi::c_char,
            output_path: *const ::std::ffi::c_char,
            guest_options: *const ::std::ffi::c_char,
            out_err: *mut *mut ::std::ffi::c_char,
        ) {
            $crate::plugin::export::compile(out_err, idl_def_json, output_path, guest_options, |i, o, g| {
                $crate::plugin::CompilerPlugin::compile_to_guest(__metaffi_compiler_plugin(), i, o, g)
            })
        }

        #[no_mangle]
        pub unsafe extern "C" fn compile_from_host(
            idl_def_json: *const ::std::ffi::c_char,
            output_path: *const ::std::ffi::c_char,
            host_options: *const ::std::ffi::c_char,
            out_err: *mut *mut ::std::ffi::c_char,
        ) {
            $crate::plugin::export::compile(out_err, idl_def_json, output_path, host_options, |i, o, h| {
                $crate::plugin::CompilerPlugin::compile_from_host(__metaffi_compiler_plugin(), i, o, h)
            })
        }
    };
}

/// Parses `key1=value1,...,keyN=valueN` compiler options.
pub fn parse_options(text: &str) -> Result<HashMap<String, String>, GuestError> {
    let mut out = HashMap::new();
    for (i, item) in text.split(',').enumerate().filter(|(_, s)| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| GuestError(format!("option {i} ('{item}') is not key=value")))?;
        if k.is_empty() {
            return Err(GuestError(format!("option {i} has an empty key")));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}
