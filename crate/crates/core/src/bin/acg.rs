fn main() {
    std::process::exit(acg::cli::main_with_args());
}
