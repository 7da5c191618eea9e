fn main() {
    std::process::exit(nongauss::cli::main_with_args(std::env::args_os()));
}
