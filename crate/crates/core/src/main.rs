fn main() {
    std::process::exit(ecs_metrology::cli::main_with_env());
}
