fn main() {
    std::process::exit(haar_mi::report::main_with_args(std::env::args_os()));
}
