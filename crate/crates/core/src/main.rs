fn main() {
    std::process::exit(virulence::cli::main());
}
