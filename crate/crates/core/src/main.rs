use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = minjoin::cli::Cli::parse();
    match minjoin::cli::run(cli) {
        Ok(summary) => {
            eprintln!("{}", summary.message);
            for file in &summary.files {
                eprintln!("wrote {}", file.display());
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(1);
        }
    }
}
