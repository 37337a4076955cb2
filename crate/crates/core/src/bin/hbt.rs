fn main() {
    std::process::exit(hbt_sim::cli::run(std::env::args_os()));
}
