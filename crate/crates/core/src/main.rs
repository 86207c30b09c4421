fn main() {
    std::process::exit(xscale::cli::main_with_args(std::env::args_os()));
}
