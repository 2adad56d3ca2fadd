fn main() {
    std::process::exit(gaussian_minkowski::cli::cli_main(std::env::args_os()));
}
