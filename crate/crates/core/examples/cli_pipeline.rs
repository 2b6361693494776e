// Drives the command-line front end in a scratch directory: generate a
// planted dataset, join it, evaluate recall, and collect anchor stats.
//
// cargo run --example cli_pipeline

use clap::Parser;
use minjoin::cli::{run, Cli};

fn invoke(args: &[&str]) -> minjoin::Result<()> {
    let cli = Cli::try_parse_from(std::iter::once("minjoin").chain(args.iter().copied()))
        .map_err(|e| minjoin::Error::InvalidParameter(e.to_string()))?;
    let summary = run(cli)?;
    println!("minjoin {}: {}", args[0], summary.message);
    Ok(())
}

pub fn run_example() -> minjoin::Result<()> {
    let dir = std::env::temp_dir().join(format!("minjoin-cli-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| minjoin::Error::InvalidParameter(e.to_string()))?;
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let (data, pairs, metrics, stats) = (
        path("data.txt"),
        path("pairs.tsv"),
        path("metrics.csv"),
        path("stats"),
    );

    invoke(&[
        "gen",
        "-o",
        &data,
        "-n",
        "200",
        "-l",
        "300",
        "--clusters",
        "20",
        "--k-plant",
        "10",
        "-s",
        "4",
    ])?;
    invoke(&["join", "-i", &data, "-o", &pairs, "-k", "10", "-t", "10"])?;
    invoke(&["eval", "-i", &data, "-o", &metrics, "-k", "10", "--sweep"])?;
    invoke(&[
        "stats", "-i", &data, "-o", &stats, "-k", "10", "--runs", "10",
    ])?;

    let written = std::fs::read_to_string(&pairs).unwrap_or_default();
    println!(
        "{}",
        written.lines().take(12).collect::<Vec<_>>().join("\n")
    );
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}

fn main() -> minjoin::Result<()> {
    run_example()
}
