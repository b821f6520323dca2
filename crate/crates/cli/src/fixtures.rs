//! Published result tables shipped with the crate, and replays of the
//! Friedman and Wilcoxon decisions over them.

use std::fmt;

use archerfish::stats::{
    friedman, paper_critical_table, wilcoxon_one_sided, FriedmanOutcome, ResultMatrix,
    FRIEDMAN_CRITICAL_DF24,
};
use serde::{Deserialize, Serialize};

use crate::config::parse_angle;
use crate::error::CliError;
use crate::store::from_csv_bytes;

macro_rules! fixture {
    ($name:literal) => {
        ($name, include_str!(concat!("../fixtures/", $name, ".csv")))
    };
}

/// Every shipped fixture by name.
pub const FIXTURES: &[(&str, &str)] = &[
    fixture!("table3"),
    fixture!("table4"),
    fixture!("table5"),
    fixture!("table6"),
    fixture!("table8"),
    fixture!("table9"),
    fixture!("table10"),
    fixture!("table11"),
    fixture!("table12"),
    fixture!("table13"),
    fixture!("table14"),
    fixture!("table15"),
    fixture!("table16"),
    fixture!("table17"),
    fixture!("table18"),
    fixture!("table19"),
    fixture!("table20"),
    fixture!("table21"),
    fixture!("table22"),
    fixture!("table23"),
    fixture!("table24"),
    fixture!("table25"),
    fixture!("table26"),
    fixture!("table27"),
    fixture!("friedman_published"),
];

/// Fixtures that [`replay_paper_stats`] accepts.
pub const REPLAYABLE: [&str; 8] = [
    "table3", "table4", "table5", "table6", "table24", "table25", "table26", "table27",
];

pub fn fixture_text(name: &str) -> Result<&'static str, CliError> {
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| CliError::UnknownFixture(name.to_string()))
}

fn malformed(name: &str, reason: impl fmt::Display) -> CliError {
    CliError::Fixture {
        name: name.to_string(),
        reason: reason.to_string(),
    }
}

/// A parameter-grid table: configurations as treatments, functions as blocks.
pub fn grid_matrix(name: &str) -> Result<ResultMatrix, CliError> {
    let text = fixture_text(name)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| malformed(name, e))?.clone();
    let functions: Vec<String> = headers.iter().skip(2).map(String::from).collect();
    let mut treatments = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| malformed(name, e))?;
        treatments.push(format!("({}, {})", &rec[0], &rec[1]));
        let vals = rec
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>().map_err(|e| malformed(name, e)))
            .collect::<Result<Vec<_>, _>>()?;
        columns.push(vals);
    }
    let values = (0..functions.len())
        .map(|b| columns.iter().map(|c| c[b]).collect())
        .collect();
    Ok(ResultMatrix::new(treatments, functions, values)?)
}

#[derive(Debug, Clone, Deserialize)]
struct PublishedFriedman {
    table: String,
    fr: f64,
    theta: String,
    omega: f64,
    rank_sum: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct LongRow {
    function: String,
    algorithm: String,
    mean: f64,
    std: f64,
}

/// One comparison as printed in, or computed for, a verdict table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub comparison: String,
    pub k: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    pub w_min: f64,
    pub critical: f64,
    pub verdict: String,
}

impl VerdictRow {
    fn same(&self, other: &Self) -> bool {
        self.comparison == other.comparison
            && self.k == other.k
            && self.w_plus == other.w_plus
            && self.w_minus == other.w_minus
            && self.w_min == other.w_min
            && self.critical == other.critical
            && self.verdict == other.verdict
    }
}

/// Which statistic of the per-function tables feeds the signed-rank test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryColumn {
    Mean,
    Std,
}

impl SummaryColumn {
    fn pick(self, r: &LongRow) -> f64 {
        match self {
            Self::Mean => r.mean,
            Self::Std => r.std,
        }
    }
}

impl fmt::Display for SummaryColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mean => "mean",
            Self::Std => "std",
        })
    }
}

#[derive(Debug, Clone)]
pub struct FriedmanReplay {
    pub fixture: String,
    pub outcome: FriedmanOutcome,
    pub published_fr: f64,
    pub published_best: String,
    pub published_rank_sum: f64,
}

impl FriedmanReplay {
    pub fn fr_relative_error(&self) -> f64 {
        (self.outcome.fr - self.published_fr).abs() / self.published_fr
    }

    pub fn decision_matches(&self) -> bool {
        self.outcome.reject_h0 == (self.published_fr > self.outcome.critical)
    }

    pub fn best_matches(&self) -> bool {
        self.outcome.best_treatment == self.published_best
    }

    /// Decision and best configuration agree and `F_r` is within 5 %.
    pub fn agrees(&self) -> bool {
        self.decision_matches() && self.best_matches() && self.fr_relative_error() <= 0.05
    }
}

#[derive(Debug, Clone)]
pub struct WilcoxonLine {
    pub printed: VerdictRow,
    pub computed: Result<VerdictRow, String>,
}

impl WilcoxonLine {
    pub fn matches(&self) -> bool {
        self.computed.as_ref().is_ok_and(|c| c.same(&self.printed))
    }
}

#[derive(Debug, Clone)]
pub struct WilcoxonReplay {
    pub fixture: String,
    pub column: SummaryColumn,
    pub lines: Vec<WilcoxonLine>,
}

impl WilcoxonReplay {
    pub fn matched(&self) -> usize {
        self.lines.iter().filter(|l| l.matches()).count()
    }

    pub fn agrees(&self) -> bool {
        self.matched() == self.lines.len()
    }
}

#[derive(Debug, Clone)]
pub enum ReplayReport {
    Friedman(FriedmanReplay),
    Wilcoxon(WilcoxonReplay),
}

impl ReplayReport {
    pub fn agrees(&self) -> bool {
        match self {
            Self::Friedman(r) => r.agrees(),
            Self::Wilcoxon(r) => r.agrees(),
        }
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISMATCH"
    }
}

impl fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Friedman(r) => {
                let o = &r.outcome;
                writeln!(
                    f,
                    "{}: Friedman over {} configurations",
                    r.fixture,
                    o.rank_sums.len()
                )?;
                writeln!(
                    f,
                    "  F_r       computed {:.4}  published {:.4}  rel. diff {:.2}%  {}",
                    o.fr,
                    r.published_fr,
                    100.0 * r.fr_relative_error(),
                    mark(r.fr_relative_error() <= 0.05)
                )?;
                writeln!(
                    f,
                    "  reject H0 computed {}  (critical {})  {}",
                    o.reject_h0,
                    o.critical,
                    mark(r.decision_matches())
                )?;
                writeln!(
                    f,
                    "  best      computed {} (rank sum {})  published {} (rank sum {})  {}",
                    o.best_treatment,
                    o.rank_sums[o.best_index],
                    r.published_best,
                    r.published_rank_sum,
                    mark(r.best_matches())
                )
            }
            Self::Wilcoxon(r) => {
                writeln!(
                    f,
                    "{}: signed-rank replay over {} columns, {}/{} rows match",
                    r.fixture,
                    r.column,
                    r.matched(),
                    r.lines.len()
                )?;
                for l in &r.lines {
                    let p = &l.printed;
                    match &l.computed {
                        Ok(c) => writeln!(
                            f,
                            "  {:<24} printed k={} W+={} W-={} -> {:<28} computed k={} W+={} W-={} -> {}  {}",
                            p.comparison,
                            p.k,
                            p.w_plus,
                            p.w_minus,
                            p.verdict,
                            c.k,
                            c.w_plus,
                            c.w_minus,
                            c.verdict,
                            mark(l.matches())
                        )?,
                        Err(e) => writeln!(f, "  {:<24} error: {e}  MISMATCH", p.comparison)?,
                    }
                }
                Ok(())
            }
        }
    }
}

fn published_friedman(name: &str) -> Result<PublishedFriedman, CliError> {
    let rows: Vec<PublishedFriedman> =
        from_csv_bytes(fixture_text("friedman_published")?.as_bytes())
            .map_err(|e| malformed("friedman_published", e))?;
    rows.into_iter()
        .find(|r| r.table == name)
        .ok_or_else(|| CliError::UnknownFixture(name.to_string()))
}

fn friedman_replay(name: &str) -> Result<FriedmanReplay, CliError> {
    let m = grid_matrix(name)?;
    let outcome = friedman(&m, FRIEDMAN_CRITICAL_DF24)?;
    let p = published_friedman(name)?;
    parse_angle(&p.theta).map_err(|e| malformed("friedman_published", e))?;
    Ok(FriedmanReplay {
        fixture: name.to_string(),
        outcome,
        published_fr: p.fr,
        published_best: format!("({}, {})", p.theta, p.omega),
        published_rank_sum: p.rank_sum,
    })
}

/// The per-function tables feeding each verdict table.
pub fn sources_of(verdict_table: &str) -> Option<[&'static str; 4]> {
    match verdict_table {
        "table24" => Some(["table8", "table9", "table10", "table11"]),
        "table25" => Some(["table12", "table13", "table14", "table15"]),
        "table26" => Some(["table16", "table17", "table18", "table19"]),
        "table27" => Some(["table20", "table21", "table22", "table23"]),
        _ => None,
    }
}

/// Per-function values of `algorithm` in the first source table that lists it.
fn algorithm_column(
    sources: &[(String, Vec<LongRow>)],
    algorithm: &str,
    reference: &str,
    column: SummaryColumn,
) -> Result<(Vec<f64>, Vec<f64>), String> {
    let (_, rows) = sources
        .iter()
        .find(|(_, rows)| rows.iter().any(|r| r.algorithm == algorithm))
        .ok_or_else(|| format!("no table lists {algorithm}"))?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for r in rows.iter().filter(|r| r.algorithm == reference) {
        let other = rows
            .iter()
            .find(|o| o.algorithm == algorithm && o.function == r.function)
            .ok_or_else(|| format!("{algorithm} missing {}", r.function))?;
        a.push(column.pick(r));
        b.push(column.pick(other));
    }
    Ok((a, b))
}

/// Replays a verdict table from its source tables using `column`.
pub fn wilcoxon_replay(name: &str, column: SummaryColumn) -> Result<WilcoxonReplay, CliError> {
    let srcs = sources_of(name).ok_or_else(|| CliError::UnknownFixture(name.to_string()))?;
    let printed: Vec<VerdictRow> =
        from_csv_bytes(fixture_text(name)?.as_bytes()).map_err(|e| malformed(name, e))?;
    let sources = srcs
        .iter()
        .map(|s| {
            let rows: Vec<LongRow> =
                from_csv_bytes(fixture_text(s)?.as_bytes()).map_err(|e| malformed(s, e))?;
            Ok((s.to_string(), rows))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let table = paper_critical_table();
    let lines = printed
        .into_iter()
        .map(|p| {
            let computed = (|| {
                let (first, second) = p
                    .comparison
                    .split_once(" vs. ")
                    .ok_or_else(|| format!("bad comparison `{}`", p.comparison))?;
                let (a, b) = algorithm_column(&sources, second, first, column)?;
                let o = wilcoxon_one_sided(&a, &b, &table).map_err(|e| e.to_string())?;
                Ok(VerdictRow {
                    comparison: p.comparison.clone(),
                    k: o.k_nonzero,
                    w_plus: o.w_plus,
                    w_minus: o.w_minus,
                    w_min: o.w_min,
                    critical: o.critical,
                    verdict: o.verdict(first, second),
                })
            })();
            WilcoxonLine {
                printed: p,
                computed,
            }
        })
        .collect();
    Ok(WilcoxonReplay {
        fixture: name.to_string(),
        column,
        lines,
    })
}

/// Friedman replay for the parameter-grid tables, signed-rank replay (over
/// the std columns) for the verdict tables.
pub fn replay_paper_stats(name: &str) -> Result<ReplayReport, CliError> {
    match name {
        "table3" | "table4" | "table5" | "table6" => {
            friedman_replay(name).map(ReplayReport::Friedman)
        }
        "table24" | "table25" | "table26" | "table27" => {
            wilcoxon_replay(name, SummaryColumn::Std).map(ReplayReport::Wilcoxon)
        }
        _ => Err(CliError::UnknownFixture(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_parses() {
        for name in ["table3", "table4", "table5", "table6"] {
            let m = grid_matrix(name).unwrap();
            assert_eq!(m.n_treatments(), 25);
        }
        assert_eq!(grid_matrix("table3").unwrap().n_blocks(), 8);
        for t in ["table24", "table25", "table26", "table27"] {
            assert_eq!(
                wilcoxon_replay(t, SummaryColumn::Mean).unwrap().lines.len(),
                12
            );
        }
    }

    #[test]
    fn unknown_fixture() {
        assert!(matches!(
            replay_paper_stats("table7"),
            Err(CliError::UnknownFixture(_))
        ));
        assert!(matches!(
            fixture_text("nope"),
            Err(CliError::UnknownFixture(_))
        ));
    }

    #[test]
    fn table24_imode_row_reversed() {
        let ReplayReport::Wilcoxon(r) = replay_paper_stats("table24").unwrap() else {
            panic!()
        };
        let verdicts: Vec<&str> = r
            .lines
            .iter()
            .map(|l| l.computed.as_ref().unwrap().verdict.as_str())
            .collect();
        assert_eq!(
            verdicts
                .iter()
                .filter(|v| v.starts_with("AHO outperforms"))
                .count(),
            11
        );
        assert!(verdicts.contains(&"IMODE outperforms AHO"));
    }
}
