fn main() {
    std::process::exit(wsd_cli::run(std::env::args_os()));
}
