fn main() {
    std::process::exit(chbs::cli::main_with_args(std::env::args_os()));
}
