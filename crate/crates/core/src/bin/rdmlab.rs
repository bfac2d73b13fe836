fn main() {
    std::process::exit(rdmlab_core::cli::main_with_args(std::env::args_os()));
}
