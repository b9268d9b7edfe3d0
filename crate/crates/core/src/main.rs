fn main() {
    std::process::exit(sigtopo::cli::cli_main(std::env::args_os()));
}
