fn main() { std::process::exit(mara_core::cli::main_entry()); }
