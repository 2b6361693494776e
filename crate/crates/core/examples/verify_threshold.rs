// The threshold edit-distance check: exact distance when it is within K,
// `None` otherwise, without filling the full table.
//
// cargo run --example verify_threshold

use minjoin::{edit_distance_at_most_k, edit_distance_full};

pub fn run_example() -> minjoin::Result<()> {
    let cases: [(&str, &str); 4] = [
        ("kitten", "sitting"),
        ("ACGTGCTAACGTGCTAACGTG", "AAACGTGCTAACGTGCTAACCT"),
        ("TCGAATCGTCGAATCGTCGAA", "TCGAATCGTCGAATCGTGGAA"),
        ("GATTACA", "CCCCCCCCCCCCCCC"),
    ];
    for (x, y) in cases {
        let full = edit_distance_full(x.as_bytes(), y.as_bytes());
        for k in [1, 4] {
            let out = edit_distance_at_most_k(x.as_bytes(), y.as_bytes(), k);
            assert_eq!(out.distance, (full <= k).then_some(full));
            println!("{x:>22} {y:<22} K={k}: {:?} (full DP {full})", out.distance);
        }
    }
    Ok(())
}

fn main() -> minjoin::Result<()> {
    run_example()
}
