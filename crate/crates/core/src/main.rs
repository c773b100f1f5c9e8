fn main() {
    std::process::exit(diamond_odmr::cli::run(std::env::args_os()));
}
