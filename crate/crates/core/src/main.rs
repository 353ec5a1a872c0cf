fn main() {
    std::process::exit(gft_core::cli::main());
}
