fn main() {
    std::process::exit(mlenhance::cli::run(std::env::args_os()));
}
