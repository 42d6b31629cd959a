fn main() {
    std::process::exit(fem2d_cli::run(std::env::args_os()));
}
