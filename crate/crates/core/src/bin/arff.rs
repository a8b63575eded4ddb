fn main() {
    std::process::exit(arff_core::cli::run(std::env::args_os()));
}
