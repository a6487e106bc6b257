//! `xllr.native`: the native runtime as a loadable plugin.

use metaffi_core::export_runtime_plugin;
use metaffi_native::NativeRuntime;

export_runtime_plugin!(NativeRuntime, NativeRuntime);
