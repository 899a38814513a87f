fn main() {
    std::process::exit(gradediv_cli::main_with_env());
}
