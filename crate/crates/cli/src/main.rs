fn main() {
    std::process::exit(stochavg_cli::main_with_args(std::env::args_os().collect()));
}
