fn main() {
    std::process::exit(seam_core::cli::run(std::env::args()));
}
