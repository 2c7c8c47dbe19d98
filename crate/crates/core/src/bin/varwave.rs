fn main() {
    std::process::exit(varwave::cli::run_cli(std::env::args_os()));
}
