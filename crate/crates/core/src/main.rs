fn main() {
    std::process::exit(trendcast::cli::run(std::env::args_os()));
}
