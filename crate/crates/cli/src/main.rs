fn main() {
    std::process::exit(hazard_twist_cli::main_with_args(std::env::args_os()));
}
