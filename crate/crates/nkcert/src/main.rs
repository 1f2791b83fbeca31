fn main() {
    std::process::exit(nkcert::cli::run());
}
