fn main() {
    std::process::exit(rplsim::cli::main_with_args(std::env::args_os()));
}
