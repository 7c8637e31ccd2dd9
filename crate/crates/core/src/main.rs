fn main() {
    std::process::exit(isgraph::cli::main_from_args(std::env::args_os()));
}
