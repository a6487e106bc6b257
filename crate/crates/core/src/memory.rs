//! The XLLR allocator.
//!
//! Everything that crosses a plugin boundary (error text, strings inside CDTs,
//! array buffers, handle records) is allocated and released through this one
//! allocator. The local implementation wraps libc `malloc`/`free` and counts
//! calls so tests can check that every buffer is released exactly once.
//!
//! Code in this crate never calls the local functions directly; it goes through
//! [`crate::xllr_api::api`], which points at the process-wide XLLR when one is
//! loaded.

use std::ffi::c_void;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::xllr_api::api;

static ALLOC_CALLS: AtomicU64 = AtomicU64::new(0);
static FREE_CALLS: AtomicU64 = AtomicU64::new(0);

/// Allocator call counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[repr(C)]
pub struct AllocStats {
    pub allocs: u64,
    pub frees: u64,
}

impl AllocStats {
    pub fn outstanding(&self) -> i64 {
        self.allocs as i64 - self.frees as i64
    }

    pub fn since(&self, earlier: AllocStats) -> AllocStats {
        AllocStats {
            allocs: self.allocs - earlier.allocs,
            frees: self.frees - earlier.frees,
        }
    }
}

/// Local allocator entrypoint. Returns null on exhaustion.
///
/// # Safety
/// Release the block with [`local_free`].
pub unsafe extern "C" fn local_alloc(size: u64) -> *mut c_void {
    let Ok(size) = usize::try_from(size) else {
        return std::ptr::null_mut();
    };
    // malloc(0) may legally return null; always hand out a unique pointer.
    let p = libc::malloc(size.max(1));
    if !p.is_null() {
        ALLOC_CALLS.fetch_add(1, Ordering::Relaxed);
    }
    p
}

/// # Safety
/// `ptr` must be null or come from [`local_alloc`] and not be freed yet.
pub unsafe extern "C" fn local_free(ptr: *mut c_void) {
    if ptr.is_null() {
        return;
    }
    FREE_CALLS.fetch_add(1, Ordering::Relaxed);
    libc::free(ptr);
}

/// Counters of the allocator local to this copy of the crate.
pub fn local_stats() -> AllocStats {
    AllocStats {
        allocs: ALLOC_CALLS.load(Ordering::Relaxed),
        frees: FREE_CALLS.load(Ordering::Relaxed),
    }
}

pub fn xllr_alloc(size: u64) -> *mut c_void {
    unsafe { (api().alloc)(size) }
}

/// # Safety
/// `ptr` must come from [`xllr_alloc`] (or a conforming XLLR) and not be freed yet.
pub unsafe fn xllr_free(ptr: *mut c_void) {
    (api().free)(ptr)
}

/// Allocates `len + 1` units and copies `len` units from `src`, terminating with 0.
///
/// # Safety
/// `src` must be valid for `len` reads.
pub unsafe fn alloc_units<T: Copy + Default>(src: *const T, len: usize) -> *mut T {
    let bytes = (len + 1) * std::mem::size_of::<T>();
    let dst = xllr_alloc(bytes as u64) as *mut T;
    if dst.is_null() {
        return dst;
    }
    if len > 0 {
        std::ptr::copy_nonoverlapping(src, dst, len);
    }
    dst.add(len).write(T::default());
    dst
}

pub fn alloc_string8(s: &[u8]) -> *mut u8 {
    unsafe { alloc_units(s.as_ptr(), s.len()) }
}

pub fn alloc_string16(s: &[u16]) -> *mut u16 {
    unsafe { alloc_units(s.as_ptr(), s.len()) }
}

pub fn alloc_string32(s: &[u32]) -> *mut u32 {
    unsafe { alloc_units(s.as_ptr(), s.len()) }
}

/// Allocates an error string for an `out_err` slot.
pub fn alloc_error(msg: &str) -> *mut std::ffi::c_char {
    alloc_string8(msg.as_bytes()) as *mut std::ffi::c_char
}

/// Number of units before the terminating zero.
///
/// # Safety
/// `p` must point to a zero-terminated buffer.
pub unsafe fn terminated_len<T: Copy + Default + PartialEq>(p: *const T) -> usize {
    let zero = T::default();
    let mut n = 0;
    while *p.add(n) != zero {
        n += 1;
    }
    n
}

/// Copies an allocator-owned error string out and releases it.
///
/// # Safety
/// `err` must be null or a live string from the XLLR allocator.
pub unsafe fn take_error(err: *mut std::ffi::c_char) -> Option<String> {
    if err.is_null() {
        return None;
    }
    let text = std::ffi::CStr::from_ptr(err).to_string_lossy().into_owned();
    xllr_free(err as *mut c_void);
    Some(text)
}
