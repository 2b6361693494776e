// Plants near-duplicate clusters in random strings and measures recall
// against the brute-force join, with one and with three repetitions.
//
// cargo run --release --example planted_recall

use minjoin::eval::pair_set;
use minjoin::partition::default_gram_length;
use minjoin::{
    brute_force_join, generate_synthetic, measure_recall, MinJoin, PartitionParams, SyntheticSpec,
};

pub fn run_example() -> minjoin::Result<Vec<f64>> {
    let k = 20;
    let spec = SyntheticSpec {
        n: 300,
        len: 400,
        alphabet_size: 4,
        clusters: 30,
        cluster_size: 3,
        k_plant: k,
        seed: 11,
    };
    let data = generate_synthetic(&spec)?;
    let truth = pair_set(&brute_force_join(&data.records, k));
    println!(
        "{} strings, {} planted pairs, {} true pairs",
        data.records.len(),
        data.planted.len(),
        truth.len()
    );

    let q = default_gram_length(spec.len, k, spec.alphabet_size)?;
    let mut recalls = Vec::new();
    for reps in [1, 3] {
        let params = PartitionParams::new(k, q)
            .with_repetitions(reps)
            .with_seed(spec.seed);
        let result = MinJoin::new(k, params).run(&data.records)?;
        let report = measure_recall(&result.pair_ids(), &truth);
        println!(
            "R = {reps}: recall {:.3}, precision {:.3}, {} verifications, {:?} total",
            report.recall,
            report.precision,
            result.stats.verifications,
            result.stats.timings.total()
        );
        recalls.push(report.recall);
    }
    Ok(recalls)
}

fn main() -> minjoin::Result<()> {
    run_example().map(|_| ())
}
