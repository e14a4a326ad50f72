fn main() {
    env_logger::init();
    std::process::exit(mu2amp_cli::run(std::env::args_os()));
}
