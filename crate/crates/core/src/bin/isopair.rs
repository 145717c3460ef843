fn main() {
    std::process::exit(isopair::cli::run(std::env::args_os()));
}
