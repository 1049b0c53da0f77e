fn main() {
    std::process::exit(lambdaflow::cli::run());
}
