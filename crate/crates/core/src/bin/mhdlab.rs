fn main() {
    std::process::exit(mhdlab::cli::main_with_args(std::env::args_os()));
}
