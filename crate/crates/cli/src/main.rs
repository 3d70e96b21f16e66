fn main() {
    std::process::exit(spinmarket_cli::main_with_args(std::env::args_os()));
}
