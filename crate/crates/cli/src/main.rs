fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("PHASEQUANT_LOG")).init();
    std::process::exit(phasequant_cli::run_cli(std::env::args_os()));
}
