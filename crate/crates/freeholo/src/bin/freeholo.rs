fn main() {
    std::process::exit(freeholo::cli::run());
}
