//! `metaffi -c --idl <file> [-g] [-h [lang,...]]`
//!
//! Picks the IDL plugin by the input's extension, turns the input into IDL
//! JSON, then runs the guest compiler of the IDL's language (`-g`) and/or the
//! host compilers (`-h`, default `rust`). Output goes to the working
//! directory.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser};
use metaffi_core::plugin::{parse_options, IdlInput, LibraryDiscovery, PluginSource};
use serde::Deserialize;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PLUGIN: i32 = 2;

pub const CONFIG_FILE: &str = "metaffi.toml";
const DEFAULT_CONFIG: &str = include_str!("../metaffi.toml");

#[derive(Debug, Parser)]
#[command(name = "metaffi", version, disable_help_flag = true, about = "MetaFFI compiler driver")]
pub struct Args {
    /// Compile.
    #[arg(short = 'c', long = "compile")]
    pub compile: bool,
    /// IDL source: any file an IDL plugin understands.
    #[arg(long, value_name = "PATH")]
    pub idl: Option<PathBuf>,
    /// Generate guest entrypoints for the IDL's language.
    #[arg(short = 'g', long = "guest")]
    pub guest: bool,
    /// Generate host wrappers for these languages.
    #[arg(
        short = 'h',
        long = "host",
        value_name = "LANG",
        num_args = 0..=1,
        default_missing_value = "rust",
        value_delimiter = ','
    )]
    pub host: Vec<String>,
    /// key1=value1,...,keyN=valueN for the guest compiler.
    #[arg(long = "guest-options", default_value = "")]
    pub guest_options: String,
    /// key1=value1,...,keyN=valueN for the host compilers.
    #[arg(long = "host-options", default_value = "")]
    pub host_options: String,
    #[arg(long, action = ArgAction::Help)]
    pub help: Option<bool>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Plugin(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Plugin(_) => EXIT_PLUGIN,
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct Config {
    /// Extension (without dot) to IDL plugin name.
    pub idl: BTreeMap<String, String>,
}

impl Config {
    /// `$METAFFI_HOME/metaffi.toml` if present, else the built-in mapping.
    pub fn load(home: &Path) -> Result<Config, CliError> {
        let path = home.join(CONFIG_FILE);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(_) => DEFAULT_CONFIG.to_string(),
        };
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn idl_plugin_for(&self, file: &Path) -> Result<&str, CliError> {
        let ext = file
            .extension()
            .map(|e| e.to_string_lossy().into_owned())
            .ok_or_else(|| CliError::Usage(format!("{} has no extension", file.display())))?;
        self.idl
            .get(&ext)
            .map(String::as_str)
            .ok_or_else(|| CliError::Usage(format!("no IDL plugin for '.{ext}' files")))
    }
}

fn plugin_error(kind: &str, name: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Plugin(format!("{kind} plugin '{name}': {e}"))
}

/// Runs a parsed command line, writing generated files into `out_dir`.
pub fn execute(args: &Args, out_dir: &Path) -> Result<(), CliError> {
    if !args.compile {
        return Err(CliError::Usage("nothing to do: pass -c".into()));
    }
    let idl = args
        .idl
        .as_deref()
        .ok_or_else(|| CliError::Usage("-c requires --idl <path>".into()))?;
    if !args.guest && args.host.is_empty() {
        return Err(CliError::Usage("pass -g and/or -h".into()));
    }
    for (flag, opts) in [("--guest-options", &args.guest_options), ("--host-options", &args.host_options)] {
        parse_options(opts).map_err(|e| CliError::Usage(format!("{flag}: {e}")))?;
    }

    metaffi_api::Xllr::get().map_err(|e| CliError::Plugin(e.to_string()))?;
    let discovery = LibraryDiscovery::from_env();
    let config = Config::load(&discovery.home())?;
    let idl_name = config.idl_plugin_for(idl)?;
    let idl_plugin = discovery
        .idl(idl_name)
        .expect("library discovery always answers")
        .map_err(|e| plugin_error("IDL", idl_name, e))?;
    let idl_path = idl.to_string_lossy();
    let json = idl_plugin
        .parse_idl(IdlInput::Path(&idl_path))
        .map_err(|e| plugin_error("IDL", idl_name, e))?;

    let out = out_dir.to_string_lossy();
    if args.guest {
        let compiler = discovery
            .compiler(idl_name)
            .expect("library discovery always answers")
            .map_err(|e| plugin_error("compiler", idl_name, e))?;
        compiler
            .compile_to_guest(&json, &out, &args.guest_options)
            .map_err(|e| plugin_error("compiler", idl_name, e))?;
    }
    for lang in &args.host {
        let compiler = discovery
            .compiler(lang)
            .expect("library discovery always answers")
            .map_err(|e| plugin_error("compiler", lang, e))?;
        compiler
            .compile_from_host(&json, &out, &args.host_options)
            .map_err(|e| plugin_error("compiler", lang, e))?;
    }
    Ok(())
}

/// Parses `argv` (including the program name) and runs it. Returns the exit
/// status; messages go to `stderr`.
pub fn run<I, T>(argv: I, out_dir: &Path, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&args, out_dir) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "metaffi: {e}");
            e.exit_code()
        }
    }
}
