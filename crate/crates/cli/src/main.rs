fn main() {
    std::process::exit(iontrap_mbqc_cli::dispatch(std::env::args_os()));
}
