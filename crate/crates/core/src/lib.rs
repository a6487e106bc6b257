//! Common data types, the XCall protocol, the plugin ABI and the IDL model
//! shared by every MetaFFI component.
//!
//! Values cross runtime boundaries as [`cdt::Cdt`] cells packed into
//! [`cdt::Cdts`] arrays. A foreign entity is reached through an
//! [`xcall::XCall`] obtained from a runtime plugin, and everything allocated
//! on one side of a boundary and released on the other goes through the XLLR
//! allocator ([`memory`]).

pub mod abi;
pub mod cache;
pub mod cdt;
pub mod function_path;
pub mod idl;
pub mod memory;
pub mod plugin;
pub mod types;
pub mod xcall;
pub mod xllr;
pub mod xllr_api;

pub use cdt::{ArrayValue, CallableValue, Cdt, Cdts, HandleValue, Value};
pub use function_path::FunctionPath;
pub use types::{MetaFFIType, TypeInfo};
pub use xcall::XCall;
