fn main() {
    std::process::exit(hylomorph::cli::main_from(std::env::args_os()));
}
