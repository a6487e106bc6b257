//! XLLR: the shared library every host and runtime plugin links against at
//! run time.
//!
//! Hosts open this library with global symbol visibility. Runtime plugins then
//! resolve the allocator and CDTS cache entrypoints from the global scope, so
//! the whole process shares one allocator and one per-thread cache.
//!
//! Pointer contracts for every export are those of `metaffi_abi.h`.

#![allow(clippy::missing_safety_doc)]

use std::ffi::{c_char, c_void};
use std::ptr;

use metaffi_core::abi::{str_arg, type_infos_from_raw, MetaffiTypeInfo};
use metaffi_core::cache::{self, CacheIndices};
use metaffi_core::cdt::Cdts;
use metaffi_core::memory::{self, alloc_error, alloc_units, AllocStats};
use metaffi_core::plugin::XCallPtr;
use metaffi_core::xcall::XCall;
use metaffi_core::xllr::{self as registry, XllrError};
use metaffi_core::xllr_api::{install, XllrApi};

/// Everything in this library allocates with its own local allocator.
fn pin() {
    let _ = install(XllrApi::local());
}

unsafe fn report(err: *mut *mut c_char, e: impl std::fmt::Display) {
    if !err.is_null() {
        *err = alloc_error(&e.to_string());
    }
}

unsafe fn run<T>(err: *mut *mut c_char, fallback: T, f: impl FnOnce() -> Result<T, XllrError>) -> T {
    pin();
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(v)) => v,
        Ok(Err(e)) => {
            report(err, e);
            fallback
        }
        Err(_) => {
            report(err, "panic inside XLLR");
            fallback
        }
    }
}

fn guest(msg: String) -> XllrError {
    XllrError::Guest(msg.into())
}

#[no_mangle]
pub unsafe extern "C" fn load_runtime_plugin(runtime_plugin_name: *const c_char, err: *mut *mut c_char) {
    run(err, (), || {
        let name = str_arg(runtime_plugin_name, "runtime_plugin_name").map_err(guest)?;
        registry::global().load_runtime_plugin(name)
    })
}

#[no_mangle]
pub unsafe extern "C" fn free_runtime_plugin(runtime_plugin_name: *const c_char, err: *mut *mut c_char) {
    run(err, (), || {
        let name = str_arg(runtime_plugin_name, "runtime_plugin_name").map_err(guest)?;
        registry::global().free_runtime_plugin(name)
    })
}

#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn load_function(
    runtime_plugin_name: *const c_char,
    module_path: *const c_char,
    function_path: *const c_char,
    params_types: *const MetaffiTypeInfo,
    params_count: i8,
    retvals_types: *const MetaffiTypeInfo,
    retval_count: i8,
    err: *mut *mut c_char,
) -> *mut XCall {
    run(err, ptr::null_mut(), || {
        let name = str_arg(runtime_plugin_name, "runtime_plugin_name").map_err(guest)?;
        let module_path = str_arg(module_path, "module_path").map_err(guest)?;
        let function_path = str_arg(function_path, "function_path").map_err(guest)?;
        let params = type_infos_from_raw(params_types, params_count).map_err(guest)?;
        let rets = type_infos_from_raw(retvals_types, retval_count).map_err(guest)?;
        Ok(registry::global()
            .load_entity(name, module_path, function_path, &params, &rets)?
            .0)
    })
}

#[no_mangle]
pub unsafe extern "C" fn make_callable(
    runtime_plugin_name: *const c_char,
    make_callable_context: *mut c_void,
    params_types: *const MetaffiTypeInfo,
    params_count: i8,
    retvals_types: *const MetaffiTypeInfo,
    retval_count: i8,
    err: *mut *mut c_char,
) -> *mut XCall {
    run(err, ptr::null_mut(), || {
        let name = str_arg(runtime_plugin_name, "runtime_plugin_name").map_err(guest)?;
        let params = type_infos_from_raw(params_types, params_count).map_err(guest)?;
        let rets = type_infos_from_raw(retvals_types, retval_count).map_err(guest)?;
        Ok(registry::global()
            .make_callable(name, make_callable_context, &params, &rets)?
            .0)
    })
}

#[no_mangle]
pub unsafe extern "C" fn free_xcall(runtime_plugin_name: *const c_char, pxcall: *mut XCall, err: *mut *mut c_char) {
    run(err, (), || {
        let name = str_arg(runtime_plugin_name, "runtime_plugin_name").map_err(guest)?;
        registry::global().free_xcall(name, XCallPtr(pxcall))
    })
}

#[no_mangle]
pub unsafe extern "C" fn alloc_cdts_buffer(params_count: u64, ret_count: u64) -> *mut Cdts {
    pin();
    cache::local_alloc_cdts_buffer(params_count, ret_count)
}

#[no_mangle]
pub unsafe extern "C" fn free_cdts_buffer(pcdts: *mut Cdts) {
    pin();
    cache::local_free_cdts_buffer(pcdts)
}

#[no_mangle]
pub unsafe extern "C" fn xllr_alloc(size: u64) -> *mut c_void {
    memory::local_alloc(size)
}

#[no_mangle]
pub unsafe extern "C" fn xllr_free(p: *mut c_void) {
    memory::local_free(p)
}

#[no_mangle]
pub unsafe extern "C" fn metaffi_alloc(size: u64) -> *mut c_void {
    memory::local_alloc(size)
}

#[no_mangle]
pub unsafe extern "C" fn metaffi_free(p: *mut c_void) {
    memory::local_free(p)
}

#[no_mangle]
pub unsafe extern "C" fn alloc_string(s: *const c_char, length: u64) -> *mut c_char {
    pin();
    alloc_units(s as *const u8, length as usize) as *mut c_char
}

#[no_mangle]
pub unsafe extern "C" fn alloc_string8(s: *const u8, length: u64) -> *mut u8 {
    pin();
    alloc_units(s, length as usize)
}

#[no_mangle]
pub unsafe extern "C" fn alloc_string16(s: *const u16, length: u64) -> *mut u16 {
    pin();
    alloc_units(s, length as usize)
}

#[no_mangle]
pub unsafe extern "C" fn alloc_string32(s: *const u32, length: u64) -> *mut u32 {
    pin();
    alloc_units(s, length as usize)
}

#[no_mangle]
pub unsafe extern "C" fn free_string(s: *mut c_void) {
    memory::local_free(s)
}

/// Allocator call counters since the library was loaded.
#[no_mangle]
pub unsafe extern "C" fn xllr_alloc_stats(out: *mut AllocStats) {
    if !out.is_null() {
        *out = memory::local_stats();
    }
}

/// CDTS cache indices of the calling thread.
#[no_mangle]
pub unsafe extern "C" fn xllr_cache_indices(out: *mut CacheIndices) {
    if !out.is_null() {
        *out = cache::cache_indices();
    }
}

/// Reference count of a loaded runtime plugin, 0 when not loaded.
#[no_mangle]
pub unsafe extern "C" fn xllr_runtime_plugin_refcount(runtime_plugin_name: *const c_char) -> u64 {
    match str_arg(runtime_plugin_name, "runtime_plugin_name") {
        Ok(name) => registry::global().refcount(name) as u64,
        Err(_) => 0,
    }
}

/// Number of loaded runtime plugins.
#[no_mangle]
pub extern "C" fn xllr_runtime_plugin_count() -> u64 {
    registry::global().len() as u64
}
