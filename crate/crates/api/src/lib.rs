//! Host-side access to MetaFFI.
//!
//! [`Xllr`] opens the XLLR shared library from `$METAFFI_HOME` with global
//! symbol visibility, so every runtime plugin it loads shares its allocator
//! and CDTS cache with this process. [`MetaFFIRuntime`], [`MetaFFIModule`]
//! and [`MetaFFIEntity`] wrap the load/call/free cycle.

mod binding;
mod convert;
mod host;
mod runtime;
mod xllr;

pub use binding::{EntitySlot, ModuleBinding, TypeSpec};
pub use convert::{FromValue, IntoValue};
pub use host::HostFunction;
pub use metaffi_core::cdt::{ArrayValue, CallableValue, HandleValue, Value};
pub use metaffi_core::types::{MetaFFIType, TypeInfo};
pub use runtime::{MetaFFIEntity, MetaFFIModule, MetaFFIRuntime};
pub use xllr::Xllr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApiError {
    #[error("cannot load {path}: {message}")]
    Load { path: String, message: String },
    #[error("{path} does not export '{symbol}'")]
    MissingSymbol { path: String, symbol: String },
    #[error("XLLR allocator already bound to another implementation")]
    AllocatorConflict,
    #[error("{0}")]
    Xllr(String),
    #[error("{0}")]
    Call(String),
    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("argument {index}: expected {expected}, got {got}")]
    ArgumentType { index: usize, expected: String, got: String },
    #[error("cannot convert {got} to {expected}")]
    Conversion { expected: &'static str, got: String },
}

pub type Result<T> = std::result::Result<T, ApiError>;
