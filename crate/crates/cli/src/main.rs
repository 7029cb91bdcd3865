fn main() {
    std::process::exit(thermoline_cli::main_with_args(std::env::args_os()));
}
