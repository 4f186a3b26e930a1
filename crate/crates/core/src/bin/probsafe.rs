fn main() {
    std::process::exit(probsafe::cli::run_cli(std::env::args_os()));
}
