fn main() {
    std::process::exit(relicpress::cli::main_exit_code());
}
