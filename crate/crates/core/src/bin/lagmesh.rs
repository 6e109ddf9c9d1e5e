fn main() {
    std::process::exit(lagmesh::cli::main_with_args(std::env::args_os()));
}
