fn main() {
    std::process::exit(linegraph_ising::cli::main());
}
