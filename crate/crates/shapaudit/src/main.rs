fn main() {
    std::process::exit(shapaudit::cli::run(std::env::args_os()));
}
