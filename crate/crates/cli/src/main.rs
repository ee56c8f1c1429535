fn main() {
    std::process::exit(pathwager_cli::run(std::env::args_os()));
}
