fn main() {
    std::process::exit(pennylab_cli::run(std::env::args_os()));
}
