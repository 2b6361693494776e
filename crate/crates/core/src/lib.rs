//! Edit similarity joins by local-hash-minimum string partitioning.
//!
//! Every string is cut at positions whose q-gram hash is a strict minimum
//! within a length-dependent radius. Two strings within edit distance `K`
//! share a partition with good probability, so a hash join over partition
//! fingerprints, followed by a length filter, a position filter, and a
//! banded edit-distance check, finds the similar pairs without ever
//! reporting a false one.
//!
//! ```
//! use minjoin::{min_join, records_from, PartitionParams};
//!
//! let data = records_from(["GATTACAGATTACAGATTACA", "GATTACAGATTTCAGATTACA", "CCCGGGCCCGGGTTTAAATTT"]);
//! let result = min_join(&data, 2, PartitionParams::new(2, 3).with_seed(7)).unwrap();
//! assert!(result.pairs.iter().all(|p| p.distance <= 2));
//! ```

pub mod cli;
pub mod error;
pub mod eval;
pub mod gramhash;
pub mod join;
pub mod minhash;
pub mod partition;
pub mod record;
pub mod verify;

pub use error::{Error, Result};
pub use eval::{
    anchor_statistics, brute_force_join, generate_synthetic, measure_recall, AnchorStats,
    EvalReport, SyntheticDataset, SyntheticSpec,
};
pub use gramhash::{content_fingerprint, gram_hash_sequence, Fingerprint, GramHasher, HashArray};
pub use join::{
    evict_stale, length_filter, min_join, position_filter, CandidatePair, FilterConfig, JoinResult,
    JoinStats, JoinedPair, MinJoin, PartitionIndex, StageTimings,
};
pub use minhash::{minhash_join, minhash_signatures, MinHashJoin, MinHashParams};
pub use partition::{
    default_gram_length, find_anchors, neighborhood_radius, partition_string,
    partition_with_repetitions, AnchorSet, PartitionList, PartitionParams, PartitionSpan,
};
pub use record::{records_from, StringRecord};
pub use verify::{edit_distance_at_most_k, edit_distance_full, VerifyOutcome};
