//! Friedman rank test over a blocks-by-treatments matrix and a one-sided
//! Wilcoxon signed-rank test with a fixed critical-value table.
//!
//! Lower values are better throughout; ties receive average ranks.

use std::collections::BTreeMap;

use thiserror::Error;

/// Chi-square critical value at `alpha = 0.05`, 24 degrees of freedom.
pub const FRIEDMAN_CRITICAL_DF24: f64 = 36.4150;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least 2 blocks and 2 treatments, got {blocks} x {treatments}")]
    DegenerateMatrix { blocks: usize, treatments: usize },
    #[error("row {row} has {found} values, expected {expected}")]
    ShapeMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("missing or NaN entry at block {block}, treatment {treatment}")]
    MissingEntry { block: usize, treatment: usize },
    #[error("paired samples differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("only {k_nonzero} non-zero differences; the table starts at {min}")]
    InsufficientData { k_nonzero: usize, min: usize },
    #[error("no critical value for k = {k}")]
    MissingCritical { k: usize },
}

/// `values[block][treatment]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultMatrix {
    pub treatments: Vec<String>,
    pub blocks: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl ResultMatrix {
    pub fn new(
        treatments: Vec<String>,
        blocks: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, StatsError> {
        let k = treatments.len();
        if values.len() != blocks.len() {
            return Err(StatsError::ShapeMismatch {
                row: values.len().min(blocks.len()),
                expected: blocks.len(),
                found: values.len(),
            });
        }
        for (row, vals) in values.iter().enumerate() {
            if vals.len() != k {
                return Err(StatsError::ShapeMismatch {
                    row,
                    expected: k,
                    found: vals.len(),
                });
            }
            if let Some(treatment) = vals.iter().position(|v| v.is_nan()) {
                return Err(StatsError::MissingEntry {
                    block: row,
                    treatment,
                });
            }
        }
        Ok(Self {
            treatments,
            blocks,
            values,
        })
    }

    /// Unlabelled matrix; treatments and blocks are numbered from 1.
    pub fn from_rows(values: Vec<Vec<f64>>) -> Result<Self, StatsError> {
        let k = values.first().map_or(0, Vec::len);
        let treatments = (1..=k).map(|i| format!("T{i}")).collect();
        let blocks = (1..=values.len()).map(|i| format!("B{i}")).collect();
        Self::new(treatments, blocks, values)
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_treatments(&self) -> usize {
        self.treatments.len()
    }
}

/// Ranks starting at 1 for the smallest value; tied values share the mean of
/// the positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanOutcome {
    pub rank_sums: Vec<f64>,
    pub fr: f64,
    pub critical: f64,
    pub reject_h0: bool,
    pub best_index: usize,
    pub best_treatment: String,
}

/// `F_r = 12 / (n k (k+1)) sum T_j^2 - 3 n (k+1)`, rejecting when
/// `F_r > critical`. The best treatment is the smallest rank sum, first index
/// on ties.
pub fn friedman(m: &ResultMatrix, critical: f64) -> Result<FriedmanOutcome, StatsError> {
    let (n, k) = (m.n_blocks(), m.n_treatments());
    if n < 2 || k < 2 {
        return Err(StatsError::DegenerateMatrix {
            blocks: n,
            treatments: k,
        });
    }
    let mut rank_sums = vec![0.0; k];
    for row in &m.values {
        for (t, r) in rank_sums.iter_mut().zip(average_ranks(row)) {
            *t += r;
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = rank_sums.iter().map(|t| t * t).sum();
    let fr = 12.0 / (nf * kf * (kf + 1.0)) * sum_sq - 3.0 * nf * (kf + 1.0);
    let mut best_index = 0;
    for (j, t) in rank_sums.iter().enumerate() {
        if *t < rank_sums[best_index] {
            best_index = j;
        }
    }
    Ok(FriedmanOutcome {
        best_treatment: m.treatments[best_index].clone(),
        best_index,
        reject_h0: fr > critical,
        critical,
        fr,
        rank_sums,
    })
}

/// Critical values of `min(W+, W-)` keyed by the number of non-zero
/// differences.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalTable(pub BTreeMap<usize, f64>);

impl CriticalTable {
    pub fn lookup(&self, k: usize) -> Result<f64, StatsError> {
        self.0
            .get(&k)
            .copied()
            .ok_or(StatsError::MissingCritical { k })
    }

    pub fn min_k(&self) -> usize {
        self.0.keys().next().copied().unwrap_or(0)
    }
}

/// `{5: 1, 7: 4, 8: 6, 9: 8, 10: 11}`.
pub fn paper_critical_table() -> CriticalTable {
    CriticalTable(BTreeMap::from([
        (5, 1.0),
        (7, 4.0),
        (8, 6.0),
        (9, 8.0),
        (10, 11.0),
    ]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonOutcome {
    pub k_nonzero: usize,
    /// Rank sum of positive `a - b` (first sample worse).
    pub w_plus: f64,
    /// Rank sum of negative `a - b` (first sample better).
    pub w_minus: f64,
    pub w_min: f64,
    pub critical: f64,
    pub significant: bool,
    /// When significant, the side with the larger rank sum in its favour;
    /// otherwise the opposite side.
    pub winner: Side,
}

impl WilcoxonOutcome {
    /// `"<winner> outperforms <loser>"`.
    pub fn verdict(&self, first: &str, second: &str) -> String {
        match self.winner {
            Side::First => format!("{first} outperforms {second}"),
            Side::Second => format!("{second} outperforms {first}"),
        }
    }
}

/// Differences `a_i - b_i`, zeros dropped, ranked by magnitude.
/// Significant when `min(W+, W-) < critical[k]`.
pub fn wilcoxon_one_sided(
    a: &[f64],
    b: &[f64],
    table: &CriticalTable,
) -> Result<WilcoxonOutcome, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let k = diffs.len();
    if k < table.min_k() || k == 0 {
        return Err(StatsError::InsufficientData {
            k_nonzero: k,
            min: table.min_k(),
        });
    }
    let critical = table.lookup(k)?;
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let (mut w_plus, mut w_minus) = (0.0, 0.0);
    for (d, r) in diffs.iter().zip(ranks) {
        if *d > 0.0 {
            w_plus += r;
        } else {
            w_minus += r;
        }
    }
    let w_min = w_plus.min(w_minus);
    let significant = w_min < critical;
    let first_favoured = w_minus > w_plus;
    let winner = if first_favoured == significant {
        Side::First
    } else {
        Side::Second
    };
    Ok(WilcoxonOutcome {
        k_nonzero: k,
        w_plus,
        w_minus,
        w_min,
        critical,
        significant,
        winner,
    })
}
