// Joins the five-string running example with a fixed gram table, printing
// each string's partitions and the verified pairs.
//
// cargo run --example running_example

use minjoin::{partition_string, GramHasher, MinJoin, PartitionParams, StringRecord};

const GRAMS: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/fixtures/example_grams.tsv"
));
const STRINGS: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/fixtures/example_strings.txt"
));

pub fn run_example() -> minjoin::Result<Vec<(usize, usize, usize)>> {
    let hasher = GramHasher::parse_fixture(GRAMS)?;
    let data: Vec<StringRecord> = minjoin::records_from(STRINGS.lines().map(str::as_bytes));
    let (q, targets, k) = (3, 3, 4);

    for r in &data {
        let parts = partition_string(&r.bytes, targets, &hasher, q)?;
        let pieces: Vec<_> = parts
            .substrings(&r.bytes)
            .map(String::from_utf8_lossy)
            .collect();
        println!(
            "s{} {:<24} radius {} -> {}",
            r.id + 1,
            String::from_utf8_lossy(&r.bytes),
            parts.radius_used,
            pieces.join(" | ")
        );
    }

    let result = MinJoin::new(k, PartitionParams::new(targets, q))
        .with_hasher(hasher)
        .run(&data)?;
    println!(
        "{} candidates, {} verified",
        result.stats.candidates_after_dedup,
        result.pairs.len()
    );
    let pairs: Vec<_> = result
        .pairs
        .iter()
        .map(|p| (p.id_a, p.id_b, p.distance))
        .collect();
    for (a, b, d) in &pairs {
        println!("s{} ~ s{}  ED = {d}", a + 1, b + 1);
    }
    Ok(pairs)
}

fn main() -> minjoin::Result<()> {
    run_example().map(|_| ())
}
