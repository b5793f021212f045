fn main() {
    std::process::exit(veff::cli::main_with_args(std::env::args_os()));
}
