fn main() {
    std::process::exit(aara::frontend::cli::cli_run(std::env::args_os()));
}
