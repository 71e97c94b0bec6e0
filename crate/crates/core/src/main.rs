fn main() {
    std::process::exit(crashscope::run_cli());
}
