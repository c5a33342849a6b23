fn main() {
    std::process::exit(qnoise::cli::run_from(std::env::args_os()));
}
