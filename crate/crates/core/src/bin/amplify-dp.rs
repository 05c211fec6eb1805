fn main() {
    std::process::exit(amplify_dp::cli::main());
}
