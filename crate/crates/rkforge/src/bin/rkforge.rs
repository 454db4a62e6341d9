fn main() {
    std::process::exit(rkforge::cli::run_from_args(std::env::args_os()));
}
