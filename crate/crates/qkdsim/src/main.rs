fn main() {
    std::process::exit(qkdsim::cli::run_from(std::env::args_os()));
}
