fn main() {
    std::process::exit(ptide_lab::cli::run_cli(std::env::args_os()));
}
