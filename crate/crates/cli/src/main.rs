fn main() {
    std::process::exit(hermitia_cli::main_with_args(std::env::args_os()));
}
