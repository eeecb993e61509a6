fn main() {
    std::process::exit(prc_lab::cli::run(std::env::args_os()));
}
