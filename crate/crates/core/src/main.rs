fn main() {
    std::process::exit(wavelet_lrd::cli::run_cli(std::env::args_os()));
}
