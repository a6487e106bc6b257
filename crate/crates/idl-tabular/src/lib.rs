//! `metaffi.idl.tabular`: manifest to IDL JSON.

use std::sync::atomic::{AtomicU64, Ordering};

use metaffi_core::export_idl_plugin;
use metaffi_core::plugin::{GuestError, GuestResult, IdlInput, IdlPlugin};

static INITS: AtomicU64 = AtomicU64::new(0);

pub struct TabularIdl;

impl IdlPlugin for TabularIdl {
    fn init(&self) {
        INITS.fetch_add(1, Ordering::SeqCst);
    }

    fn parse_idl(&self, input: IdlInput<'_>) -> GuestResult<String> {
        let (text, source) = match input {
            IdlInput::SourceCode(text) => (text.to_string(), "source.tabular".to_string()),
            IdlInput::Path(path) => (
                std::fs::read_to_string(path).map_err(|e| GuestError(format!("{path}: {e}")))?,
                path.to_string(),
            ),
        };
        let manifest = metaffi_tabular::parse(&text).map_err(|e| GuestError(format!("{source}: {e}")))?;
        let def = metaffi_tabular::to_idl(&manifest, &source).map_err(|e| GuestError(e.to_string()))?;
        Ok(def.to_json())
    }
}

export_idl_plugin!(TabularIdl, TabularIdl);

/// How many times `init` ran in this process.
#[no_mangle]
pub extern "C" fn tabular_idl_init_count() -> u64 {
    INITS.load(Ordering::SeqCst)
}
