use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::stats::SlopeFit;

/// Rank gate `D < 1/m` as applied to the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub rank: usize,
    #[serde(rename = "D")]
    pub d: f64,
    pub bound: f64,
    pub admissible: bool,
}

impl Admissibility {
    pub fn new(rank: usize, d: f64) -> Self {
        let bound = 1.0 / rank as f64;
        Self {
            rank,
            d,
            bound,
            admissible: d < bound,
        }
    }
}

/// One replication-level number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawRow {
    pub n: usize,
    pub replication: usize,
    pub label: String,
    pub value: f64,
}

/// Aggregate of the raw rows sharing `(n, label)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub label: String,
    pub count: usize,
    pub mean: f64,
    pub se: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    /// Experiment-specific figures, e.g. exceedance probabilities.
    pub extra: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub replications: usize,
    pub n_ladder: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admissibility: Option<Admissibility>,
    pub summary: Vec<SummaryRow>,
    pub fits: Vec<SlopeFit>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub passed: bool,
    #[serde(skip)]
    pub raw: Vec<RawRow>,
    /// Which summary statistic feeds the plot data.
    #[serde(skip)]
    pub plot_statistic: PlotStatistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlotStatistic {
    #[default]
    Median,
    Mean,
    Extra(&'static str),
}

impl ExperimentReport {
    pub fn new(kind: &str, cfg: &ExperimentConfig) -> Self {
        Self {
            experiment: kind.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            replications: cfg.replications,
            n_ladder: cfg.n_ladder.clone(),
            admissibility: None,
            summary: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            passed: true,
            raw: Vec::new(),
            plot_statistic: PlotStatistic::Median,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary_for(&self, n: usize, label: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.n == n && s.label == label)
    }

    /// `{experiment}_{first 16 hex digits of the config hash}`
    pub fn stem(&self) -> String {
        format!("{}_{}", self.experiment, &self.config_hash[..16])
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Header `n,replication,label,value`, rows in generation order.
    pub fn raw_csv(&self) -> String {
        let mut out = String::from("n,replication,label,value\n");
        for r in &self.raw {
            let _ = writeln!(out, "{},{},{},{:e}", r.n, r.replication, r.label, r.value);
        }
        out
    }

    /// Header `series,log_n,log_value`; non-positive values are skipped.
    pub fn plot_csv(&self) -> String {
        let mut out = String::from("series,log_n,log_value\n");
        for s in &self.summary {
            let v = match self.plot_statistic {
                PlotStatistic::Median => s.median,
                PlotStatistic::Mean => s.mean,
                PlotStatistic::Extra(key) => match s.extra.get(key) {
                    Some(v) => *v,
                    None => continue,
                },
            };
            if v > 0.0 && v.is_finite() && s.n > 0 {
                let _ = writeln!(out, "{},{:e},{:e}", s.label, (s.n as f64).ln(), v.ln());
            }
        }
        out
    }
}

/// Summaries per `(n, label)` in order of first appearance.
pub fn summarize(raw: &[RawRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, String)> = Vec::new();
    let mut groups: BTreeMap<(usize, String), Vec<f64>> = BTreeMap::new();
    for r in raw {
        let key = (r.n, r.label.clone());
        if !groups.contains_key(&key) {
            keys.push(key.clone());
        }
        groups.entry(key).or_default().push(r.value);
    }
    keys.into_iter()
        .map(|key| {
            let v = &groups[&key];
            let mut sorted = v.clone();
            sorted.sort_by(f64::total_cmp);
            SummaryRow {
                n: key.0,
                label: key.1,
                count: v.len(),
                mean: super::stats::mean(v),
                se: super::stats::std_error(v),
                median: super::stats::quantile_sorted(&sorted, 0.5),
                q10: super::stats::quantile_sorted(&sorted, 0.1),
                q90: super::stats::quantile_sorted(&sorted, 0.9),
                extra: BTreeMap::new(),
            }
        })
        .collect()
}
