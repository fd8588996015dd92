fn main() {
    std::process::exit(amorphic::cli::run(std::env::args_os()));
}
