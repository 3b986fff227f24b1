fn main() {
    std::process::exit(netmimo::cli::main_with_args(std::env::args_os()));
}
