fn main() {
    std::process::exit(dualcap::cli::run(std::env::args().collect()));
}
