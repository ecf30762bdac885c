fn main() {
    std::process::exit(shiftfdr::cli::main_with_args(std::env::args_os()));
}
