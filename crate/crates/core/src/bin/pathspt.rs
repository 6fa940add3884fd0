fn main() {
    std::process::exit(pathspt::cli::main_with(std::env::args_os()));
}
