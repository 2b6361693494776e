// Compares the MinHash signature join with partition-based candidates on
// the same planted data: recall against verification work.
//
// cargo run --release --example minhash_baseline

use minjoin::eval::pair_set;
use minjoin::partition::default_gram_length;
use minjoin::{
    brute_force_join, generate_synthetic, measure_recall, minhash_join, MinHashParams, MinJoin,
    PartitionParams, SyntheticSpec,
};

pub fn run_example() -> minjoin::Result<()> {
    let k = 20;
    let spec = SyntheticSpec {
        n: 300,
        len: 400,
        alphabet_size: 4,
        clusters: 30,
        cluster_size: 3,
        k_plant: k,
        seed: 3,
    };
    let data = generate_synthetic(&spec)?.records;
    let truth = pair_set(&brute_force_join(&data, k));

    let q = default_gram_length(spec.len, k, spec.alphabet_size)?;
    let mj = MinJoin::new(k, PartitionParams::new(k, q).with_seed(3)).run(&data)?;
    let r = measure_recall(&mj.pair_ids(), &truth);
    println!(
        "{:<18} recall {:.3}  verifications {:>6}",
        "minjoin T=K", r.recall, mj.stats.verifications
    );

    for q in [6, 8] {
        for ell in [1, 4, 16] {
            let res = minhash_join(&data, k, MinHashParams::new(q, ell, 3))?;
            let r = measure_recall(&res.pair_ids(), &truth);
            let label = format!("minhash q={q} l={ell}");
            println!(
                "{label:<18} recall {:.3}  verifications {:>6}",
                r.recall, res.stats.verifications
            );
        }
    }
    Ok(())
}

fn main() -> minjoin::Result<()> {
    run_example()
}
