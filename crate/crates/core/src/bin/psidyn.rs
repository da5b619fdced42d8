fn main() {
    std::process::exit(psidyn::cli::main_with_args(std::env::args_os()));
}
