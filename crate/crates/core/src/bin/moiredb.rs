fn main() -> std::process::ExitCode {
    moiredb::cli::main()
}
