fn main() {
    std::process::exit(vidrestore::cli::run(std::env::args_os()));
}
