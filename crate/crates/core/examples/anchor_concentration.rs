// Counts interior anchors on random strings over many hash seeds. The
// count should sit close to the targeted number of partitions.
//
// cargo run --example anchor_concentration

use minjoin::eval::{random_string, GENERATOR_ALPHABET};
use minjoin::{anchor_statistics, AnchorStats};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> minjoin::Result<AnchorStats> {
    let (len, targets, q) = (5000, 100, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let strings: Vec<Vec<u8>> = (0..5)
        .map(|_| random_string(&mut rng, len, &GENERATOR_ALPHABET[..4]))
        .collect();
    let seeds: Vec<u64> = (0..20).collect();
    let stats = anchor_statistics(&strings, targets, q, &seeds)?;

    let spread = (targets as f64).sqrt() * 2.0;
    println!("{} runs, T = {targets}", stats.counts.len());
    println!("mean {:.2}  variance {:.2}", stats.mean, stats.variance);
    println!(
        "within T +- 2 sqrt(T): {:.1}%",
        100.0 * stats.mass_within(targets as f64, spread)
    );
    for (count, _, cumulative) in stats.cdf().iter().step_by(4) {
        println!("{count:>5} {}", "#".repeat((cumulative * 40.0) as usize));
    }
    Ok(stats)
}

fn main() -> minjoin::Result<()> {
    run_example().map(|_| ())
}
