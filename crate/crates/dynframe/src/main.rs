fn main() {
    std::process::exit(dynframe::cli::run(std::env::args_os()));
}
