fn main() {
    std::process::exit(scrible_sim::cli::run());
}
