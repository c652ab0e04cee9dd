fn main() {
    std::process::exit(plaid::workbench::run_cli(std::env::args_os()));
}
