fn main() {
    std::process::exit(chiral_array::cli::run_cli(std::env::args_os()));
}
