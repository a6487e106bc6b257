//! The tabular guest language: small declarative modules whose functions,
//! globals and classes are served through the runtime plugin ABI.

pub mod extract;
pub mod handles;
pub mod manifest;
pub mod runtime;

pub use extract::to_idl;
pub use manifest::{parse, Manifest, ManifestError};
pub use runtime::{TabularRuntime, RUNTIME_ID};
