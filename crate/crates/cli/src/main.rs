fn main() {
    std::process::exit(arbor_cli::main_with(std::env::args_os()));
}
