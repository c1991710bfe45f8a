fn main() {
    std::process::exit(revineq::cli::main_with(std::env::args_os()));
}
