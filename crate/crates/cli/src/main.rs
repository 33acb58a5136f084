fn main() {
    std::process::exit(grtl_cli::run_command(std::env::args_os()));
}
