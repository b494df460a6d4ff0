fn main() -> std::process::ExitCode {
    fourfa::cli::run()
}
