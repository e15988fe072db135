fn main() {
    std::process::exit(atgen::cli::run());
}
