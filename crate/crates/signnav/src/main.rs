fn main() {
    std::process::exit(signnav::cli::run());
}
