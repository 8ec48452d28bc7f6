fn main() {
    std::process::exit(agromcda_cli::run(std::env::args_os()));
}
