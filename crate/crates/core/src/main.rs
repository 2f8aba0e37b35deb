fn main() {
    std::process::exit(hitsample::cli::main_entry());
}
