fn main() {
    std::process::exit(qrainbow::cli::run(std::env::args()));
}
