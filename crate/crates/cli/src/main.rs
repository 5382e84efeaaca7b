fn main() {
    std::process::exit(wrinkleplate_cli::run(std::env::args_os()));
}
