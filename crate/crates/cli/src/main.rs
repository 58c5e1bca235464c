fn main() {
    std::process::exit(msdhmm_cli::run(std::env::args_os()));
}
