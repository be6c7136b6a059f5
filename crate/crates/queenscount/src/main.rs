fn main() {
    let code = queenscount::cli::parse_and_dispatch(std::env::args_os());
    std::process::exit(code);
}
