fn main() {
    std::process::exit(ppmhd::cli::main_with_args(std::env::args_os()));
}
