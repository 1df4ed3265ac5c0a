fn main() {
    std::process::exit(hit::cli::run_cli(std::env::args_os()));
}
