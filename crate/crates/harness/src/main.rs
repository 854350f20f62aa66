fn main() {
    let code = ergomax_harness::cli::run(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
