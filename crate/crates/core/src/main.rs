fn main() -> std::process::ExitCode {
    swingup::cli::main()
}
