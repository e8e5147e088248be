fn main() {
    std::process::exit(pbt::cli::run(std::env::args_os()));
}
