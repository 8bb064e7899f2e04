fn main() {
    std::process::exit(vwwave_core::cli::run(std::env::args_os()));
}
