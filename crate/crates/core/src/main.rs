fn main() {
    std::process::exit(numrange::cli::run(std::env::args_os()));
}
