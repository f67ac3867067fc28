fn main() -> std::process::ExitCode {
    prlab::cli::main_with_args(std::env::args_os())
}
