//! Binding to the process-wide XLLR services.
//!
//! Plugins and hosts are separate dynamic libraries, each with its own copy of
//! this crate. To share one allocator and one per-thread CDTS cache they call
//! through a table of entrypoints resolved from the process global symbol
//! scope, where the XLLR library places `xllr_alloc`, `xllr_free`,
//! `alloc_cdts_buffer` and `free_cdts_buffer`. When no XLLR is loaded the
//! table falls back to the implementations compiled into this copy.

use std::ffi::c_void;
use std::sync::OnceLock;

use crate::cache;
use crate::cdt::Cdts;
use crate::memory;

pub type AllocFn = unsafe extern "C" fn(u64) -> *mut c_void;
pub type FreeFn = unsafe extern "C" fn(*mut c_void);
pub type AllocCdtsFn = unsafe extern "C" fn(u64, u64) -> *mut Cdts;
pub type FreeCdtsFn = unsafe extern "C" fn(*mut Cdts);

#[derive(Clone, Copy)]
pub struct XllrApi {
    pub alloc: AllocFn,
    pub free: FreeFn,
    pub alloc_cdts_buffer: AllocCdtsFn,
    pub free_cdts_buffer: FreeCdtsFn,
    pub is_local: bool,
}

impl std::fmt::Debug for XllrApi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("XllrApi")
            .field("is_local", &self.is_local)
            .finish_non_exhaustive()
    }
}

impl XllrApi {
    pub fn local() -> XllrApi {
        XllrApi {
            alloc: memory::local_alloc,
            free: memory::local_free,
            alloc_cdts_buffer: cache::local_alloc_cdts_buffer,
            free_cdts_buffer: cache::local_free_cdts_buffer,
            is_local: true,
        }
    }

    /// Looks the four symbols up in the global scope of the process.
    pub fn from_global_scope() -> Option<XllrApi> {
        #[cfg(unix)]
        {
            let this = libloading::os::unix::Library::this();
            unsafe {
                let alloc = *this.get::<AllocFn>(b"xllr_alloc\0").ok()?;
                let free = *this.get::<FreeFn>(b"xllr_free\0").ok()?;
                let alloc_cdts = *this.get::<AllocCdtsFn>(b"alloc_cdts_buffer\0").ok()?;
                let free_cdts = *this.get::<FreeCdtsFn>(b"free_cdts_buffer\0").ok()?;
                Some(XllrApi {
                    alloc,
                    free,
                    alloc_cdts_buffer: alloc_cdts,
                    free_cdts_buffer: free_cdts,
                    is_local: false,
                })
            }
        }
        #[cfg(not(unix))]
        {
            None
        }
    }
}

static API: OnceLock<XllrApi> = OnceLock::new();

/// The active XLLR entrypoints, resolved on first use.
pub fn api() -> &'static XllrApi {
    API.get_or_init(|| XllrApi::from_global_scope().unwrap_or_else(XllrApi::local))
}

/// Pins the table explicitly. Fails if it was already resolved to something else.
pub fn install(table: XllrApi) -> Result<(), XllrApi> {
    let active = API.get_or_init(|| table);
    if active.alloc as usize == table.alloc as usize {
        Ok(())
    } else {
        Err(*active)
    }
}
