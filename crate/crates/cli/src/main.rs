fn main() {
    std::process::exit(splitfix_cli::run_cli(std::env::args_os()));
}
