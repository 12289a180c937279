fn main() { std::process::exit(freqdec::cli::run()); }
