fn main() {
    std::process::exit(opsinfer::cli::run(std::env::args_os()));
}
