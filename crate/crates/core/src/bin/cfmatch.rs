fn main() {
    std::process::exit(cfmatch::cli::main_with_args(std::env::args_os()));
}
