fn main() {
    let cwd = std::env::current_dir().unwrap_or_else(|_| ".".into());
    let code = metaffi_cli::run(std::env::args_os(), &cwd, &mut std::io::stderr());
    std::process::exit(code);
}
