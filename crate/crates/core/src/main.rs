fn main() {
    std::process::exit(g0lcum::cli::run(std::env::args_os()));
}
