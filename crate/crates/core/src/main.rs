fn main() {
    std::process::exit(othering::cli::main());
}
