fn main() {
    std::process::exit(infbern_cli::run(std::env::args_os()));
}
