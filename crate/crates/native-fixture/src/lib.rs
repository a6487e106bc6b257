//! Fixture library for the native runtime. Each `shape_<params>_<ret>`
//! export folds its arguments into a checksum and returns it in the
//! requested form.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::sync::atomic::{AtomicI64, Ordering};

static LAST: AtomicI64 = AtomicI64::new(0);

thread_local! {
    static TEXT: RefCell<CString> = RefCell::new(CString::default());
}

#[derive(Default)]
struct Mix {
    h: i64,
    sum: f64,
}

impl Mix {
    fn int(&mut self, x: i64) {
        self.h = self.h.wrapping_mul(31).wrapping_add(x);
    }

    fn float(&mut self, x: f64) {
        self.h = self.h.wrapping_mul(31).wrapping_add(x.to_bits() as i64);
        self.sum += x;
    }

    unsafe fn string(&mut self, s: *const c_char) {
        for b in CStr::from_ptr(s).to_bytes() {
            self.int(*b as i64);
        }
        self.int(-1);
    }

    fn finish_none(self) {
        LAST.store(self.h, Ordering::SeqCst);
    }

    fn finish_int(self) -> i64 {
        self.h
    }

    fn finish_float(self) -> f64 {
        (self.h % 1_000_000) as f64 * 0.5 + self.sum
    }

    fn finish_string(self) -> *const c_char {
        TEXT.with(|t| {
            *t.borrow_mut() = CString::new(format!("h{:x}", self.h)).expect("no NUL");
            t.borrow().as_ptr()
        })
    }
}

mod shapes {
    #![allow(unused_mut, non_snake_case, clippy::missing_safety_doc)]
    use super::Mix;
    include!(concat!(env!("OUT_DIR"), "/shapes_gen.rs"));
}

/// Checksum stored by the last call of a shape without a return value.
#[no_mangle]
pub extern "C" fn fixture_last() -> i64 {
    LAST.load(Ordering::SeqCst)
}

#[no_mangle]
pub extern "C" fn add_i64(a: i64, b: i64) -> i64 {
    a.wrapping_add(b)
}

/// The returned string lives until the next call on the same thread.
///
/// # Safety
/// `name` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn greet(name: *const c_char) -> *const c_char {
    let name = CStr::from_ptr(name).to_string_lossy();
    TEXT.with(|t| {
        *t.borrow_mut() = CString::new(format!("hello, {name}")).expect("no NUL");
        t.borrow().as_ptr()
    })
}
