fn main() {
    std::process::exit(guardbeam::cli::run_from(std::env::args_os()));
}
