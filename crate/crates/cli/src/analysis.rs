//! Friedman and signed-rank decisions over a results store.

use std::fmt;

use archerfish::stats::{
    friedman, paper_critical_table, wilcoxon_one_sided, CriticalTable, FriedmanOutcome,
    ResultMatrix,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::CliError;
use crate::fixtures::VerdictRow;
use crate::store::{group_cells, ResultRow};

/// Upper 5 % point of chi-square with `df` degrees of freedom.
pub fn chi_square_critical(df: usize) -> f64 {
    ChiSquared::new(df as f64)
        .expect("df >= 1")
        .inverse_cdf(0.95)
}

/// Mean final error per `(problem, dim)` block and `(theta, omega)`
/// treatment. Every block must contain every treatment.
pub fn store_matrix(rows: &[ResultRow]) -> Result<ResultMatrix, CliError> {
    let cells = group_cells(rows);
    let mut treatments: Vec<(f64, f64)> = Vec::new();
    let mut blocks: Vec<(String, usize)> = Vec::new();
    for (key, _) in &cells {
        if !treatments.contains(&(key.theta, key.omega)) {
            treatments.push((key.theta, key.omega));
        }
        if !blocks.contains(&(key.problem.clone(), key.dim)) {
            blocks.push((key.problem.clone(), key.dim));
        }
    }
    let mut values = vec![vec![f64::NAN; treatments.len()]; blocks.len()];
    for (key, members) in &cells {
        let b = blocks
            .iter()
            .position(|x| x.0 == key.problem && x.1 == key.dim)
            .unwrap();
        let t = treatments
            .iter()
            .position(|x| *x == (key.theta, key.omega))
            .unwrap();
        values[b][t] = members.iter().map(|r| r.best_error).sum::<f64>() / members.len() as f64;
    }
    Ok(ResultMatrix::new(
        treatments
            .iter()
            .map(|(t, o)| format!("(theta={t}, omega={o})"))
            .collect(),
        blocks.iter().map(|(p, d)| format!("{p}/d{d}")).collect(),
        values,
    )?)
}

#[derive(Debug, Clone)]
pub struct StoreStats {
    pub friedman: FriedmanOutcome,
    /// Best treatment against every other treatment.
    pub verdicts: Vec<VerdictRow>,
    /// Comparisons the critical table cannot decide.
    pub skipped: Vec<(String, String)>,
}

impl fmt::Display for StoreStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = &self.friedman;
        writeln!(
            f,
            "Friedman: F_r = {:.4}, critical {:.4}, reject H0: {}, best {}",
            o.fr, o.critical, o.reject_h0, o.best_treatment
        )?;
        for v in &self.verdicts {
            writeln!(
                f,
                "  {}: k={} W+={} W-={} min={} critical={} -> {}",
                v.comparison, v.k, v.w_plus, v.w_minus, v.w_min, v.critical, v.verdict
            )?;
        }
        for (c, why) in &self.skipped {
            writeln!(f, "  {c}: skipped ({why})")?;
        }
        Ok(())
    }
}

/// Friedman at `critical` (default: chi-square 0.95 quantile for `k - 1`
/// degrees of freedom), then the best treatment against each other one with
/// `table` (default: the published critical values).
pub fn store_stats(
    rows: &[ResultRow],
    critical: Option<f64>,
    table: Option<&CriticalTable>,
) -> Result<StoreStats, CliError> {
    let m = store_matrix(rows)?;
    let crit = critical.unwrap_or_else(|| chi_square_critical(m.n_treatments().max(2) - 1));
    let fo = friedman(&m, crit)?;
    let default_table = paper_critical_table();
    let table = table.unwrap_or(&default_table);
    let column = |t: usize| -> Vec<f64> { m.values.iter().map(|row| row[t]).collect() };
    let best = fo.best_index;
    let mut verdicts = Vec::new();
    let mut skipped = Vec::new();
    for t in (0..m.n_treatments()).filter(|t| *t != best) {
        let (first, second) = (&m.treatments[best], &m.treatments[t]);
        let comparison = format!("{first} vs. {second}");
        match wilcoxon_one_sided(&column(best), &column(t), table) {
            Ok(o) => verdicts.push(VerdictRow {
                comparison,
                k: o.k_nonzero,
                w_plus: o.w_plus,
                w_minus: o.w_minus,
                w_min: o.w_min,
                critical: o.critical,
                verdict: o.verdict(first, second),
            }),
            Err(e) => skipped.push((comparison, e.to_string())),
        }
    }
    Ok(StoreStats {
        friedman: fo,
        verdicts,
        skipped,
    })
}
