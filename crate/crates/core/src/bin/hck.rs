fn main() {
    std::process::exit(hck::cli::main_with_args(std::env::args_os()));
}
