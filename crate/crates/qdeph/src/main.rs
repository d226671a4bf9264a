fn main() {
    std::process::exit(qdeph::cli::run(std::env::args_os()));
}
