fn main() {
    std::process::exit(pbft_qbd::cli::run());
}
