fn main() {
    std::process::exit(metagames::cli::run_cli(std::env::args_os()));
}
