fn main() {
    env_logger::Builder::new().filter_level(log::LevelFilter::Info).init();
    std::process::exit(pairvortex::cli::run(std::env::args_os()));
}
