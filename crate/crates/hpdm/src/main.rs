fn main() {
    std::process::exit(hpdm::cli::dispatch(std::env::args().collect()));
}
