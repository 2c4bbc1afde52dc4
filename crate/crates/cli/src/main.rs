fn main() {
    std::process::exit(tmsq_cli::run(std::env::args_os()));
}
