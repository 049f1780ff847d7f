fn main() {
    std::process::exit(kpell_cli::run(std::env::args_os()));
}
