fn main() {
    std::process::exit(patchcomp::cli::run(std::env::args_os()));
}
