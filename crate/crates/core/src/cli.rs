/// Placeholder until the subcommands land.
pub fn run_cli() -> i32 {
    2
}
