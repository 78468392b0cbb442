fn main() {
    std::process::exit(bellconc::cli::main_from_env());
}
