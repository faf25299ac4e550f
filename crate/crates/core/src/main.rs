fn main() {
    std::process::exit(pathvec::cli::exec(std::env::args_os()));
}
