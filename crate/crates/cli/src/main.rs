fn main() {
    std::process::exit(cat_bench::run_cli(std::env::args_os()));
}
