fn main() {
    std::process::exit(siegel_radon::cli::main_with_args(std::env::args_os()));
}
