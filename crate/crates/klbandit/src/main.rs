fn main() {
    std::process::exit(klbandit::cli::run(std::env::args_os()));
}
