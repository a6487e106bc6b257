//! `metaffi.compiler.rust`: Rust host wrappers from MetaFFI IDL.
//!
//! Host options: `runtime=<plugin>` overrides the module's runtime tag and
//! `module_path=<path>` replaces the module path embedded in the wrapper.

pub mod gen;

use std::path::Path;

use metaffi_core::export_compiler_plugin;
use metaffi_core::idl::IdlDefinition;
use metaffi_core::plugin::{parse_options, CompilerPlugin, GuestError, GuestResult};

pub struct RustCompiler;

impl CompilerPlugin for RustCompiler {
    fn compile_to_guest(&self, _idl_json: &str, _output_path: &str, _options: &str) -> GuestResult<()> {
        Err(GuestError("Not Implemented".into()))
    }

    fn compile_from_host(&self, idl_json: &str, output_path: &str, options: &str) -> GuestResult<()> {
        let idl = IdlDefinition::from_json(idl_json).map_err(|e| GuestError(format!("invalid IDL: {e}")))?;
        let opts = gen::Options::from_map(&parse_options(options)?).map_err(GuestError)?;
        let source = gen::generate(&idl, &opts).map_err(GuestError)?;
        let dir = Path::new(output_path);
        let file = dir.join(gen::output_file_name(&idl));
        std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(&file, source))
            .map_err(|e| GuestError(format!("cannot write {}: {e}", file.display())))
    }
}

export_compiler_plugin!(RustCompiler, RustCompiler);
