fn main() -> std::process::ExitCode {
    flowrefine::cli::main()
}
