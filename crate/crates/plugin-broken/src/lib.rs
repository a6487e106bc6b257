//! A runtime plugin missing `free_xcall`. Loading it must fail as a whole.

use std::ffi::{c_char, c_void};
use std::ptr;

#[no_mangle]
pub extern "C" fn runtime_id() -> u64 {
    0xDEAD
}

#[no_mangle]
pub extern "C" fn load_runtime(_err: *mut *mut c_char) {}

#[no_mangle]
pub extern "C" fn free_runtime(_err: *mut *mut c_char) {}

#[no_mangle]
pub extern "C" fn load_entity(
    _module_path: *const c_char,
    _function_path: *const c_char,
    _params: *const c_void,
    _params_count: i8,
    _rets: *const c_void,
    _rets_count: i8,
    _err: *mut *mut c_char,
) -> *mut c_void {
    ptr::null_mut()
}

#[no_mangle]
pub extern "C" fn make_callable(
    _token: *mut c_void,
    _params: *const c_void,
    _params_count: i8,
    _rets: *const c_void,
    _rets_count: i8,
    _err: *mut *mut c_char,
) -> *mut c_void {
    ptr::null_mut()
}
