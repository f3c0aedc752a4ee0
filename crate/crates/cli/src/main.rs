fn main() {
    std::process::exit(isogeo::run(std::env::args_os()));
}
