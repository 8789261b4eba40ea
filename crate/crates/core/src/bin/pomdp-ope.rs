fn main() {
    let code = pomdp_ope::cli::run(std::env::args_os());
    std::process::exit(code);
}
