fn main() {
    std::process::exit(wpset_cli::run(std::env::args_os()));
}
