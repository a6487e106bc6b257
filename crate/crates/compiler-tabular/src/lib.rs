//! `metaffi.compiler.tabular`. Tabular modules are loaded directly by the
//! runtime, so there is nothing to generate on the guest side, and tabular
//! is not a host language.

use metaffi_core::export_compiler_plugin;
use metaffi_core::plugin::{CompilerPlugin, GuestError, GuestResult};

pub struct TabularCompiler;

impl CompilerPlugin for TabularCompiler {
    fn compile_to_guest(&self, _idl_json: &str, _output_path: &str, _options: &str) -> GuestResult<()> {
        Err(GuestError("Not Implemented".into()))
    }

    fn compile_from_host(&self, _idl_json: &str, _output_path: &str, _options: &str) -> GuestResult<()> {
        Err(GuestError("Not Implemented".into()))
    }
}

export_compiler_plugin!(TabularCompiler, TabularCompiler);
