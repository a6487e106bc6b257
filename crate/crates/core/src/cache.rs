//! Per-thread CDTS buffer cache.
//!
//! Each thread owns [`CACHE_CDTS`] CDTS slots and [`CACHE_CDT`] CDT slots.
//! Every call takes two CDTS (parameters and return values) plus one CDT per
//! argument and return value. Requests that do not fit are served from the
//! XLLR allocator as a single block. Cached pairs must be released in LIFO
//! order, which is the order nested calls unwind in.

use std::cell::{Cell, UnsafeCell};
use std::ffi::c_void;
use std::mem::size_of;

use thiserror::Error;

use crate::cdt::{deep_free_cells, Cdt, Cdts};
use crate::memory::{xllr_alloc, xllr_free};

pub const CACHE_CDTS: usize = 50;
pub const CACHE_CDT: usize = 50;

/// Current per-thread cache positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[repr(C)]
pub struct CacheIndices {
    pub cdts: u64,
    pub cdt: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CacheError {
    #[error("cached CDTS pair {got:#x} freed out of order (expected {expected:#x})")]
    LifoViolation { expected: usize, got: usize },
    #[error("CDTS pair {0:#x} does not belong to this thread's cache")]
    Foreign(usize),
}

struct Cache {
    cdts: UnsafeCell<[Cdts; CACHE_CDTS]>,
    cdt: UnsafeCell<[Cdt; CACHE_CDT]>,
    cdts_index: Cell<usize>,
    cdt_index: Cell<usize>,
}

thread_local! {
    static CACHE: Cache = const {
        Cache {
            cdts: UnsafeCell::new([const { Cdts::EMPTY }; CACHE_CDTS]),
            cdt: UnsafeCell::new([const { Cdt::EMPTY }; CACHE_CDT]),
            cdts_index: Cell::new(0),
            cdt_index: Cell::new(0),
        }
    };
}

impl Cache {
    fn cdts_base(&self) -> *mut Cdts {
        self.cdts.get() as *mut Cdts
    }

    fn cdt_base(&self) -> *mut Cdt {
        self.cdt.get() as *mut Cdt
    }

    fn owns(&self, pair: *mut Cdts) -> bool {
        let base = self.cdts_base() as usize;
        let p = pair as usize;
        p >= base && p < base + CACHE_CDTS * size_of::<Cdts>()
    }

    fn alloc(&self, params: usize, rets: usize) -> Option<*mut Cdts> {
        let span = params.checked_add(rets)?;
        let ci = self.cdts_index.get();
        let di = self.cdt_index.get();
        if span > CACHE_CDT || ci + 2 > CACHE_CDTS || di + span > CACHE_CDT {
            return None;
        }
        unsafe {
            let cells = self.cdt_base().add(di);
            for i in 0..span {
                cells.add(i).write(Cdt::EMPTY);
            }
            let pair = self.cdts_base().add(ci);
            pair.write(Cdts {
                arr: cells,
                length: params as u64,
                allocated_on_heap: 0,
            });
            pair.add(1).write(Cdts {
                arr: cells.add(params),
                length: rets as u64,
                allocated_on_heap: 0,
            });
            self.cdts_index.set(ci + 2);
            self.cdt_index.set(di + span);
            Some(pair)
        }
    }

    unsafe fn free(&self, pair: *mut Cdts) -> Result<(), CacheError> {
        let ci = self.cdts_index.get();
        let expected = if ci >= 2 {
            self.cdts_base().add(ci - 2)
        } else {
            std::ptr::null_mut()
        };
        if pair != expected {
            return Err(CacheError::LifoViolation {
                expected: expected as usize,
                got: pair as usize,
            });
        }
        let span = ((*pair).length + (*pair.add(1)).length) as usize;
        deep_free_cells(&mut *pair);
        deep_free_cells(&mut *pair.add(1));
        self.cdts_index.set(ci - 2);
        self.cdt_index.set(self.cdt_index.get() - span);
        Ok(())
    }
}

fn alloc_heap_pair(params: usize, rets: usize) -> *mut Cdts {
    let Some(span) = params.checked_add(rets) else {
        return std::ptr::null_mut();
    };
    let Some(bytes) = span
        .checked_mul(size_of::<Cdt>())
        .and_then(|b| b.checked_add(2 * size_of::<Cdts>()))
    else {
        return std::ptr::null_mut();
    };
    let pair = xllr_alloc(bytes as u64) as *mut Cdts;
    if pair.is_null() {
        return pair;
    }
    unsafe {
        let cells = pair.add(2) as *mut Cdt;
        for i in 0..span {
            cells.add(i).write(Cdt::EMPTY);
        }
        pair.write(Cdts {
            arr: cells,
            length: params as u64,
            allocated_on_heap: 1,
        });
        pair.add(1).write(Cdts {
            arr: cells.add(params),
            length: rets as u64,
            allocated_on_heap: 1,
        });
    }
    pair
}

/// Takes a parameter/return pair from this thread's cache, or from the heap
/// when it does not fit. Null only if the heap allocation fails.
pub fn alloc_pair(params: u64, rets: u64) -> *mut Cdts {
    let (Ok(p), Ok(r)) = (usize::try_from(params), usize::try_from(rets)) else {
        return std::ptr::null_mut();
    };
    CACHE
        .with(|c| c.alloc(p, r))
        .unwrap_or_else(|| alloc_heap_pair(p, r))
}

/// Deep-frees the pair's cells, then returns its storage.
///
/// # Safety
/// `pair` must come from [`alloc_pair`] on this thread and not be freed yet.
pub unsafe fn free_pair(pair: *mut Cdts) -> Result<(), CacheError> {
    if pair.is_null() {
        return Ok(());
    }
    if (*pair).allocated_on_heap != 0 {
        deep_free_cells(&mut *pair);
        deep_free_cells(&mut *pair.add(1));
        xllr_free(pair as *mut c_void);
        return Ok(());
    }
    CACHE.with(|c| {
        if !c.owns(pair) {
            return Err(CacheError::Foreign(pair as usize));
        }
        c.free(pair)
    })
}

pub fn cache_indices() -> CacheIndices {
    CACHE.with(|c| CacheIndices {
        cdts: c.cdts_index.get() as u64,
        cdt: c.cdt_index.get() as u64,
    })
}

/// Whether a pair was served from the cache.
///
/// # Safety
/// `pair` must point at a live pair.
pub unsafe fn is_cached(pair: *const Cdts) -> bool {
    (*pair).allocated_on_heap == 0
}

/// C entrypoint backing `alloc_cdts_buffer` in this copy of the crate.
///
/// # Safety
/// The result must be released with [`local_free_cdts_buffer`] on the same
/// thread.
pub unsafe extern "C" fn local_alloc_cdts_buffer(params: u64, rets: u64) -> *mut Cdts {
    alloc_pair(params, rets)
}

/// C entrypoint backing `free_cdts_buffer`. Out-of-order frees are a
/// programming error: debug builds abort, release builds log and leak.
///
/// # Safety
/// `pair` must come from [`local_alloc_cdts_buffer`] on this thread.
pub unsafe extern "C" fn local_free_cdts_buffer(pair: *mut Cdts) {
    if let Err(e) = free_pair(pair) {
        if cfg!(debug_assertions) {
            eprintln!("free_cdts_buffer: {e}");
            std::process::abort();
        }
        log::error!("free_cdts_buffer: {e}");
    }
}
