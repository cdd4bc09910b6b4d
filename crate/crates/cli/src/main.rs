fn main() {
    std::process::exit(covtest_cli::run_from(std::env::args_os()));
}
