fn main() {
    std::process::exit(retrofit_core::cli::main());
}
