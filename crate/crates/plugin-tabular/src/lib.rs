//! `xllr.tabular`: the tabular runtime as a loadable plugin, plus a few
//! introspection exports used by tests.

use std::ffi::{c_char, CStr};

use metaffi_core::cdt::{encode, Cdt};
use metaffi_core::export_runtime_plugin;
use metaffi_core::xcall::set_error;
use metaffi_tabular::runtime;
use metaffi_tabular::TabularRuntime;

export_runtime_plugin!(TabularRuntime, TabularRuntime::new());

#[no_mangle]
pub extern "C" fn tabular_handle_count() -> u64 {
    runtime::handle_count() as u64
}

#[no_mangle]
pub extern "C" fn tabular_context_count() -> u64 {
    runtime::context_count() as u64
}

#[no_mangle]
pub extern "C" fn tabular_init_count() -> u64 {
    runtime::lifecycle_counts().0
}

#[no_mangle]
pub extern "C" fn tabular_teardown_count() -> u64 {
    runtime::lifecycle_counts().1
}

/// Reads a field of the object pinned under `key` straight from the table.
/// The value is written into `out`, which the caller frees.
///
/// # Safety
/// `field` must be a NUL-terminated string and `out` a writable CDT.
#[no_mangle]
pub unsafe extern "C" fn tabular_inspect_field(key: u64, field: *const c_char, out: *mut Cdt, err: *mut *mut c_char) {
    if field.is_null() || out.is_null() {
        set_error(err, "null argument");
        return;
    }
    let field = CStr::from_ptr(field).to_string_lossy();
    let result = runtime::read_field(key, &field).and_then(|v| encode(&mut *out, &v).map_err(|e| e.to_string()));
    if let Err(e) = result {
        set_error(err, &e);
    }
}
