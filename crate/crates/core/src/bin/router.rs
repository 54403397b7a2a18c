fn main() {
    std::process::exit(photon_router::cli::main_from_args(std::env::args_os()));
}
