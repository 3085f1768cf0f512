fn main() {
    std::process::exit(campanato::cli::run());
}
