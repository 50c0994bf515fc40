fn main() {
    std::process::exit(ltve_cli::main_with_args(std::env::args_os()));
}
