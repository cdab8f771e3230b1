fn main() {
    std::process::exit(lagflow::cli::main());
}
