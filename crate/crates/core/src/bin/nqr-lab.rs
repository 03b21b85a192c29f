fn main() {
    std::process::exit(nqr_holonomy::lab::cli::run(std::env::args_os()));
}
