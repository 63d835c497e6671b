fn main() {
    std::process::exit(minball::cli::run(std::env::args_os()));
}
