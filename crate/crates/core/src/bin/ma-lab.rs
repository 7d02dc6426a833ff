fn main() -> std::process::ExitCode {
    ma_lab::cli::main()
}
