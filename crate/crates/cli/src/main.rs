use denselab_cli::app;
use denselab_cli::config::SEED_ENV;

fn main() {
    let code = app::run(
        std::env::args_os(),
        std::env::var(SEED_ENV).ok(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
