fn main() {
    std::process::exit(argmine::cli::run(std::env::args_os()));
}
