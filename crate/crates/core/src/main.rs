fn main() {
    std::process::exit(pomp_core::cli::cli_dispatch(std::env::args_os()));
}
