fn main() {
    std::process::exit(relcalc::cli::main());
}
