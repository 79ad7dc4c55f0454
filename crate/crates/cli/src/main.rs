fn main() {
    std::process::exit(tim_cli::run_cli(std::env::args_os()));
}
