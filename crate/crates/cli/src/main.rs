fn main() {
    std::process::exit(lexkit_cli::run().code());
}
