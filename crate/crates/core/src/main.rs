fn main() {
    std::process::exit(abclab::cli::parse_and_dispatch(std::env::args_os()));
}
