fn main() {
    std::process::exit(asr_causal::cli::main_with_args(std::env::args_os()));
}
