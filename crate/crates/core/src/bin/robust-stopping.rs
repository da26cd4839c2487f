fn main() {
    std::process::exit(robust_stopping::expcli::main_with_args(std::env::args_os()));
}
