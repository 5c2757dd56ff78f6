fn main() {
    std::process::exit(waxman::cli::run(std::env::args_os()));
}
