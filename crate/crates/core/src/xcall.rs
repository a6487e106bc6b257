//! XCall records and the entrypoint calling contract.
//!
//! An [`XCall`] is two machine words: the entrypoint address and an opaque
//! context token. Entities with parameters or return values are invoked as
//! `entry(context, pcdts, out_err)` where `pcdts` points at a parameter/return
//! CDTS pair. Entities with neither use `entry(context, out_err)`.

use std::ffi::{c_char, c_void};
use std::ptr;

use thiserror::Error;

use crate::cdt::{decode_all, encode_all, CdtError, Cdts, Value};
use crate::memory::{alloc_error, take_error};
use crate::xllr_api::api;

/// `void (*)(void* context, cdts* pcdts, char** out_err)`
pub type XCallParamsFn = unsafe extern "C" fn(*mut c_void, *mut Cdts, *mut *mut c_char);
/// `void (*)(void* context, char** out_err)`
pub type XCallNoParamsFn = unsafe extern "C" fn(*mut c_void, *mut *mut c_char);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(C)]
pub struct XCall {
    pub pxcall_and_context: [*mut c_void; 2],
}

// Records are immutable after creation; the tokens are plain addresses.
unsafe impl Send for XCall {}
unsafe impl Sync for XCall {}

impl Default for XCall {
    fn default() -> Self {
        XCall {
            pxcall_and_context: [ptr::null_mut(); 2],
        }
    }
}

impl XCall {
    pub fn with_params(entry: XCallParamsFn, context: *mut c_void) -> XCall {
        XCall {
            pxcall_and_context: [entry as *mut c_void, context],
        }
    }

    pub fn without_params(entry: XCallNoParamsFn, context: *mut c_void) -> XCall {
        XCall {
            pxcall_and_context: [entry as *mut c_void, context],
        }
    }

    pub fn entrypoint(&self) -> *mut c_void {
        self.pxcall_and_context[0]
    }

    pub fn context(&self) -> *mut c_void {
        self.pxcall_and_context[1]
    }

    pub fn is_null(&self) -> bool {
        self.entrypoint().is_null()
    }
}

/// The four entrypoint variants a runtime plugin selects between.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntrypointKind {
    ParamsRet,
    ParamsNoRet,
    NoParamsRet,
    NoParamsNoRet,
}

impl EntrypointKind {
    pub fn name(self) -> &'static str {
        match self {
            EntrypointKind::ParamsRet => "xcall_params_ret",
            EntrypointKind::ParamsNoRet => "xcall_params_no_ret",
            EntrypointKind::NoParamsRet => "xcall_no_params_ret",
            EntrypointKind::NoParamsNoRet => "xcall_no_params_no_ret",
        }
    }

    /// Whether the entrypoint takes a CDTS pair.
    pub fn takes_buffer(self) -> bool {
        self != EntrypointKind::NoParamsNoRet
    }
}

pub fn select_entrypoint(params: usize, rets: usize) -> EntrypointKind {
    match (params > 0, rets > 0) {
        (true, true) => EntrypointKind::ParamsRet,
        (true, false) => EntrypointKind::ParamsNoRet,
        (false, true) => EntrypointKind::NoParamsRet,
        (false, false) => EntrypointKind::NoParamsNoRet,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum XCallError {
    #[error("xcall has a null entrypoint")]
    NullEntrypoint,
    #[error("{0}")]
    Guest(String),
    #[error(transparent)]
    Cdt(#[from] CdtError),
    #[error("CDTS buffer allocation failed")]
    OutOfMemory,
    #[error("expected {expected} arguments, got {got}")]
    ArgumentCount { expected: usize, got: usize },
}

/// Invokes an XCall. `pair` selects the entrypoint shape: with a pair the
/// three-argument form is used, without it the two-argument form.
///
/// # Safety
/// `xcall` must have been produced for the matching shape and `pair` must
/// match the signature the entity was loaded with.
pub unsafe fn invoke_xcall(xcall: &XCall, pair: Option<*mut Cdts>) -> Result<(), XCallError> {
    if xcall.is_null() {
        return Err(XCallError::NullEntrypoint);
    }
    let mut err: *mut c_char = ptr::null_mut();
    match pair {
        Some(pcdts) => {
            let f: XCallParamsFn = std::mem::transmute(xcall.entrypoint());
            f(xcall.context(), pcdts, &mut err);
        }
        None => {
            let f: XCallNoParamsFn = std::mem::transmute(xcall.entrypoint());
            f(xcall.context(), &mut err);
        }
    }
    match take_error(err) {
        Some(msg) => Err(XCallError::Guest(msg)),
        None => Ok(()),
    }
}

/// A CDTS pair from the XLLR buffer cache, returned on drop.
pub struct CdtsBuffer {
    pair: *mut Cdts,
}

impl CdtsBuffer {
    pub fn new(params: usize, rets: usize) -> Result<CdtsBuffer, XCallError> {
        let pair = unsafe { (api().alloc_cdts_buffer)(params as u64, rets as u64) };
        if pair.is_null() {
            return Err(XCallError::OutOfMemory);
        }
        Ok(CdtsBuffer { pair })
    }

    pub fn as_ptr(&self) -> *mut Cdts {
        self.pair
    }

    pub fn params(&mut self) -> &mut Cdts {
        unsafe { &mut *self.pair }
    }

    pub fn rets(&mut self) -> &mut Cdts {
        unsafe { &mut *self.pair.add(1) }
    }

    pub fn from_cache(&self) -> bool {
        unsafe { (*self.pair).allocated_on_heap == 0 }
    }
}

impl Drop for CdtsBuffer {
    fn drop(&mut self) {
        unsafe { (api().free_cdts_buffer)(self.pair) }
    }
}

/// Encodes `args`, invokes, and decodes `ret_count` return values.
///
/// # Safety
/// See [`invoke_xcall`].
pub unsafe fn call_values(
    xcall: &XCall,
    args: &[Value],
    ret_count: usize,
) -> Result<Vec<Value>, XCallError> {
    if args.is_empty() && ret_count == 0 {
        invoke_xcall(xcall, None)?;
        return Ok(Vec::new());
    }
    let mut buf = CdtsBuffer::new(args.len(), ret_count)?;
    encode_all(buf.params(), args)?;
    invoke_xcall(xcall, Some(buf.as_ptr()))?;
    Ok(decode_all(buf.rets())?)
}

/// Stores `msg` in an `out_err` slot as an XLLR-allocated string.
///
/// # Safety
/// `out_err` must be null or valid for a write.
pub unsafe fn set_error(out_err: *mut *mut c_char, msg: &str) {
    if !out_err.is_null() {
        *out_err = alloc_error(msg);
    }
}

/// Splits an entrypoint's `pcdts` into its parameter and return CDTS.
///
/// # Safety
/// `pcdts` must point at a live pair that is not otherwise borrowed.
pub unsafe fn pair_parts<'a>(pcdts: *mut Cdts) -> (&'a mut Cdts, &'a mut Cdts) {
    (&mut *pcdts, &mut *pcdts.add(1))
}
