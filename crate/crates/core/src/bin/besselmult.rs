fn main() {
    std::process::exit(bessel_multipliers::cli::main_with_args(std::env::args_os()));
}
