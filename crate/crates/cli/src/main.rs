fn main() {
    std::process::exit(guided_decode_cli::run(std::env::args_os()));
}
