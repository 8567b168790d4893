fn main() {
    std::process::exit(specnorm_cli::main_with(std::env::args_os()));
}
