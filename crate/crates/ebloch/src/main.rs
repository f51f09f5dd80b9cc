fn main() {
    std::process::exit(ebloch::cli::main_with_args(std::env::args_os()));
}
