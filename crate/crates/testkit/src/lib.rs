//! Test support: builds every plugin shared library with a nested cargo
//! invocation and stages them under their plugin file names in one directory,
//! which becomes `$METAFFI_HOME` for the test process.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Mutex, MutexGuard, OnceLock};

use metaffi_api::Xllr;
use metaffi_core::plugin::HOME_ENV;

/// (package, library name, staged file stem)
pub const STAGED: &[(&str, &str, &str)] = &[
    ("metaffi-xllr", "xllr", "xllr"),
    ("metaffi-plugin-tabular", "xllr_tabular", "xllr.tabular"),
    ("metaffi-idl-tabular", "metaffi_idl_tabular", "metaffi.idl.tabular"),
    ("metaffi-compiler-tabular", "metaffi_compiler_tabular", "metaffi.compiler.tabular"),
    ("metaffi-compiler-rust", "metaffi_compiler_rust", "metaffi.compiler.rust"),
    ("metaffi-plugin-native", "xllr_native", "xllr.native"),
    ("metaffi-plugin-broken", "xllr_broken_missing_free", "xllr.broken_missing_free"),
    ("metaffi-native-fixture", "native_fixture", "native_fixture"),
];

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("workspace root")
}

fn library_file(lib: &str) -> String {
    format!("{}{lib}{}", std::env::consts::DLL_PREFIX, std::env::consts::DLL_SUFFIX)
}

/// Copies via a temporary name and a rename, so a library another process
/// has mapped is never truncated.
fn stage(from: &Path, to: &Path) {
    let tmp = to.with_extension(format!("tmp{}", std::process::id()));
    std::fs::copy(from, &tmp).unwrap_or_else(|e| panic!("copy {}: {e}", from.display()));
    std::fs::rename(&tmp, to).unwrap_or_else(|e| panic!("rename to {}: {e}", to.display()));
}

fn build() -> PathBuf {
    let root = workspace_root();
    let target = root.join("target/metaffi-stage");
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let mut cmd = Command::new(cargo);
    cmd.current_dir(&root).arg("build").arg("--target-dir").arg(&target);
    for (pkg, _, _) in STAGED {
        cmd.args(["-p", pkg]);
    }
    let out = cmd.output().expect("run cargo");
    if !out.status.success() {
        panic!("building plugins failed:\n{}", String::from_utf8_lossy(&out.stderr));
    }
    let home = target.join("home");
    std::fs::create_dir_all(&home).expect("create plugin home");
    for (_, lib, stem) in STAGED {
        let file = format!("{stem}{}", std::env::consts::DLL_SUFFIX);
        stage(&target.join("debug").join(library_file(lib)), &home.join(file));
    }
    std::fs::write(home.join("metaffi.toml"), include_str!("../../cli/metaffi.toml")).expect("write config");
    home
}

/// The staged plugin directory. Also exported as `$METAFFI_HOME`.
pub fn home() -> &'static Path {
    static HOME: OnceLock<PathBuf> = OnceLock::new();
    HOME.get_or_init(|| {
        let home = build();
        std::env::set_var(HOME_ENV, &home);
        home
    })
}

/// The process XLLR, loaded from the staged home.
pub fn xllr() -> &'static Xllr {
    home();
    Xllr::get().expect("load XLLR")
}

pub fn fixture_library() -> PathBuf {
    home().join(format!("native_fixture{}", std::env::consts::DLL_SUFFIX))
}

pub fn corpus(name: &str) -> PathBuf {
    workspace_root().join("crates/tabular/corpus").join(name)
}

/// Serializes tests that assert on process-wide counters.
pub fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|p| p.into_inner())
}
