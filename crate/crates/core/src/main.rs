fn main() {
    std::process::exit(eigbound::cli::run());
}
