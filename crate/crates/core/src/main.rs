fn main() {
    std::process::exit(plevy::cli::main());
}
