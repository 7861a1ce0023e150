fn main() {
    std::process::exit(tunnelnav_cli::run_cli(std::env::args_os()));
}
