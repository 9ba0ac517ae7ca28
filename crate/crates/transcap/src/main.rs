fn main() {
    std::process::exit(transcap::cli::main_with_args(std::env::args_os()));
}
