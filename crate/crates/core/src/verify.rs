//! Edit distance verification.
//!
//! [`edit_distance_at_most_k`] is the threshold check used by every join
//! engine: a diagonal band of width `2K + 1` with early exit once no cell
//! can still finish within `K`. [`edit_distance_full`] is the plain
//! quadratic DP kept as an independent oracle.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub within_threshold: bool,
    /// Exact distance, present iff `within_threshold`.
    pub distance: Option<usize>,
}

impl VerifyOutcome {
    fn within(distance: usize) -> Self {
        VerifyOutcome {
            within_threshold: true,
            distance: Some(distance),
        }
    }

    fn beyond() -> Self {
        VerifyOutcome {
            within_threshold: false,
            distance: None,
        }
    }
}

const INF: u32 = u32::MAX / 4;

/// Whether `ED(x, y) <= k`, with the exact distance when it is.
///
/// Cell `(i, j)` lives at band offset `j + k - i`. Work is at most
/// `(2k + 1) * min(|x|, |y|)` cells and usually far less: a row stops
/// the computation when every cell plus the cost of reaching the final
/// diagonal exceeds `k`.
pub fn edit_distance_at_most_k(x: &[u8], y: &[u8], k: usize) -> VerifyOutcome {
    let (a, b) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let (n, m) = (a.len(), b.len());
    if m - n > k {
        return VerifyOutcome::beyond();
    }
    // distances never exceed m, so a wider band buys nothing
    let k = k.min(m);
    if n == 0 {
        return VerifyOutcome::within(m);
    }
    let width = 2 * k + 1;
    let final_diag = (m + k - n) as i64;
    let limit = k as u32;
    let mut prev = vec![INF; width];
    let mut cur = vec![INF; width];
    for j in 0..=k.min(m) {
        prev[j + k] = j as u32;
    }
    for i in 1..=n {
        let lo = i.saturating_sub(k);
        let hi = (i + k).min(m);
        cur.fill(INF);
        let ai = a[i - 1];
        let mut row_best = INF;
        for j in lo..=hi {
            let d = j + k - i;
            let v = if j == 0 {
                i as u32
            } else {
                let diag = prev[d] + u32::from(ai != b[j - 1]);
                let up = if d + 1 < width { prev[d + 1] + 1 } else { INF };
                let left = if d > 0 { cur[d - 1] + 1 } else { INF };
                diag.min(up).min(left)
            };
            let v = v.min(INF);
            cur[d] = v;
            // each diagonal step toward the final one costs an indel
            let lower = v + (d as i64 - final_diag).unsigned_abs() as u32;
            row_best = row_best.min(lower);
        }
        if row_best > limit {
            return VerifyOutcome::beyond();
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let dist = prev[m + k - n];
    if dist <= limit {
        VerifyOutcome::within(dist as usize)
    } else {
        VerifyOutcome::beyond()
    }
}

/// Levenshtein distance by the full `|x| * |y|` table.
pub fn edit_distance_full(x: &[u8], y: &[u8]) -> usize {
    let mut row: Vec<usize> = (0..=y.len()).collect();
    for (i, &xc) in x.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &yc) in y.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = (diag + usize::from(xc != yc))
                .min(above + 1)
                .min(row[j] + 1);
            diag = above;
        }
    }
    row[y.len()]
}
