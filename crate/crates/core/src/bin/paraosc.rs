fn main() {
    std::process::exit(paraosc::cli::run(std::env::args_os()));
}
