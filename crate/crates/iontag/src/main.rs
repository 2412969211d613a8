fn main() {
    std::process::exit(iontag::cli::main_entry());
}
