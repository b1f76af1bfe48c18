fn main() -> std::process::ExitCode {
    opo_noise::commands::main()
}
