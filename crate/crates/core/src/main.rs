fn main() {
    std::process::exit(clarifyir::cli::dispatch(std::env::args_os()));
}
