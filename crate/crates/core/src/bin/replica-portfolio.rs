fn main() {
    std::process::exit(replica_portfolio::cli::main_with_args(std::env::args_os().skip(1)));
}
