fn main() {
    std::process::exit(poisson_sharp::cli::run(std::env::args()));
}
