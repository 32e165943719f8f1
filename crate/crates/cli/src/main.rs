fn main() {
    std::process::exit(orbitforge_cli::app::main_from(std::env::args_os()));
}
