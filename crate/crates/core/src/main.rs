use pu_auc::cli::cli_main;

fn main() {
    env_logger::init();
    std::process::exit(cli_main(std::env::args_os()));
}
