fn main() {
    std::process::exit(iterreg::cli::main());
}
