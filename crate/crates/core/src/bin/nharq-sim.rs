fn main() {
    std::process::exit(nharq::cli::run(std::env::args_os()));
}
