use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::empirical::grid::{default_t_points, pseudo_sample, LATTICE_CAP};
use crate::empirical::EvaluationGrid;
use crate::error::{Error, Result};
use crate::ext_real;
use crate::hermite::{QuadratureSpec, Subordinator, DEFAULT_RANK_TOL, MAX_ORDER};
use crate::lrd::{CovarianceModel, SAMPLER_CAP};

/// Only accepted value of `schema`.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Reduction,
    Limit,
    Moment,
    Variance,
    PartitionCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Reduction => "reduction",
            ExperimentKind::Limit => "limit",
            ExperimentKind::Moment => "moment",
            ExperimentKind::Variance => "variance",
            ExperimentKind::PartitionCheck => "partition-check",
        }
    }

    fn distributional(self) -> bool {
        matches!(self, ExperimentKind::Reduction | ExperimentKind::Limit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Quantile points per output axis when `x_points` is absent.
    pub points_per_axis: usize,
    /// Finite points per axis; sentinels are added.
    #[serde(with = "ext_real::option_nested", skip_serializing_if = "Option::is_none")]
    pub x_points: Option<Vec<Vec<f64>>>,
    pub t_points: Vec<f64>,
    pub cap: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points_per_axis: 33,
            x_points: None,
            t_points: default_t_points(),
            cap: LATTICE_CAP,
        }
    }
}

impl GridSpec {
    pub fn build(&self, g: &Subordinator) -> Result<EvaluationGrid> {
        let grid = match &self.x_points {
            Some(axes) => EvaluationGrid::from_finite(axes.clone(), self.t_points.clone())?,
            None => EvaluationGrid::quantile(g, self.points_per_axis, self.t_points.clone())?,
        };
        if grid.q() != g.q() {
            return Err(Error::Config {
                field: "grid.x_points".into(),
                message: format!("{} axes given, the subordinator has {} components", grid.q(), g.q()),
            });
        }
        EvaluationGrid::with_cap(grid.axes().to_vec(), grid.t_points().to_vec(), self.cap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentSpec {
    /// Probabilities `P(Y ∈ A)` the boxes should approximate.
    pub targets: Vec<f64>,
    /// `n / N`.
    pub n_fraction: f64,
    /// Finest chaining level searched for boxes.
    pub quality: usize,
}

impl Default for MomentSpec {
    fn default() -> Self {
        Self {
            targets: vec![0.5, 0.05, 0.005],
            n_fraction: 0.5,
            quality: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionSpec {
    pub quality: usize,
    pub random_points: usize,
    /// Probe values for one output dimension; several dimensions probe at the
    /// decomposition boundaries instead.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probes_per_axis: Option<usize>,
}

impl Default for PartitionSpec {
    fn default() -> Self {
        Self {
            quality: 6,
            random_points: 50,
            probes_per_axis: None,
        }
    }
}

fn default_replications() -> usize {
    200
}

fn default_qmax() -> usize {
    6
}

fn default_rank_tol() -> f64 {
    DEFAULT_RANK_TOL
}

/// One JSON document describing a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    pub model: CovarianceModel<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subordinator: Option<Subordinator>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub n_ladder: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default = "default_qmax")]
    pub qmax: usize,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    /// Evaluation point of the limit experiment.
    #[serde(default, with = "ext_real::option_vec", skip_serializing_if = "Option::is_none")]
    pub x_slice: Option<Vec<f64>>,
    /// Largest acceptable KS distance at the longest length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_threshold: Option<f64>,
    /// Path length for `simulate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    /// Total Hermite order for the variance experiment; defaults to the rank.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default)]
    pub moment: MomentSpec,
    #[serde(default)]
    pub partition: PartitionSpec,
}

fn cfg_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Parses and validates. Parse errors name the offending field path and
    /// the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<document>".to_string() } else { path };
            cfg_err(&field, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn subordinator(&self) -> Subordinator {
        self.subordinator
            .clone()
            .unwrap_or_else(|| Subordinator::identity_p(self.model.p))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(cfg_err("schema", format!("unsupported schema {}, expected {SCHEMA_VERSION}", self.schema)));
        }
        let d = self.model.d;
        if !(d > 0.0 && d < 1.0) {
            return Err(cfg_err("model.D", format!("D = {d} must lie in (0, 1)")));
        }
        self.model.validate().map_err(|e| cfg_err("model", e.to_string()))?;
        if let Some(g) = &self.subordinator {
            if g.p != self.model.p {
                return Err(cfg_err(
                    "subordinator.p",
                    format!("input dimension {} differs from model.p = {}", g.p, self.model.p),
                ));
            }
            g.validate().map_err(|e| cfg_err("subordinator", e.to_string()))?;
        }
        if self.n_ladder.iter().any(|&n| n == 0 || n > SAMPLER_CAP)
            || self.n_ladder.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(cfg_err("n_ladder", format!("lengths must increase strictly within [1, {SAMPLER_CAP}]")));
        }
        if self.replications == 0 {
            return Err(cfg_err("replications", "must be positive"));
        }
        if let Some(kind) = self.experiment {
            if kind.distributional() && self.replications < 50 {
                return Err(cfg_err("replications", "distributional experiments need at least 50"));
            }
            if kind != ExperimentKind::PartitionCheck && self.n_ladder.is_empty() {
                return Err(cfg_err("n_ladder", "at least one length is required"));
            }
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(cfg_err("epsilons", "must be positive"));
        }
        self.quadrature.validate()?;
        if self.qmax == 0 || self.qmax > MAX_ORDER {
            return Err(cfg_err("qmax", format!("must lie in [1, {MAX_ORDER}]")));
        }
        if !(self.rank_tol > 0.0) {
            return Err(cfg_err("rank_tol", "must be positive"));
        }
        if let Some(x) = &self.x_slice {
            if x.len() != self.subordinator().q() || x.iter().any(|v| v.is_nan()) {
                return Err(cfg_err("x_slice", "needs one non-NaN value per output coordinate"));
            }
        }
        if let Some(n) = self.length {
            if n == 0 || n > SAMPLER_CAP {
                return Err(cfg_err("length", format!("must lie in [1, {SAMPLER_CAP}]")));
            }
        }
        let m = &self.moment;
        if m.targets.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
            return Err(cfg_err("moment.targets", "probabilities must lie in (0, 1]"));
        }
        if !(m.n_fraction > 0.0 && m.n_fraction <= 1.0) {
            return Err(cfg_err("moment.n_fraction", "must lie in (0, 1]"));
        }
        if m.quality == 0 || m.quality > 12 {
            return Err(cfg_err("moment.quality", "must lie in [1, 12]"));
        }
        if self.partition.quality == 0 || self.partition.quality > 12 {
            return Err(cfg_err("partition.quality", "must lie in [1, 12]"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form (keys sorted, defaults filled in).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn short_hash(&self) -> String {
        self.hash()[..16].to_string()
    }

    /// Default evaluation point: the pseudo-sample median of each output axis.
    pub fn x_slice_or_median(&self) -> Vec<f64> {
        if let Some(x) = &self.x_slice {
            return x.clone();
        }
        let g = self.subordinator();
        let sample = pseudo_sample(&g, 8192);
        (0..g.q())
            .map(|j| {
                let mut col: Vec<f64> = sample.iter().map(|y| y[j]).collect();
                col.sort_by(f64::total_cmp);
                col[col.len() / 2]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"schema":1,"experiment":"reduction","model":{"p":1,"D":0.4,"kind":"fgn","cross":[[1.0]]},
        "n_ladder":[256,1024],"seed":7}"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(c.replications, 200);
        assert_eq!(c.grid.points_per_axis, 33);
        assert_eq!(c.subordinator(), Subordinator::identity());
        assert_eq!(c.hash().len(), 64);
        assert_eq!(c.hash(), ExperimentConfig::from_json(BASE).unwrap().hash());
    }

    #[test]
    fn errors_name_fields() {
        let bad = BASE.replace("0.4", "1.5");
        match ExperimentConfig::from_json(&bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "model.D"),
            other => panic!("{other:?}"),
        }
        let unknown = BASE.replace("\"seed\":7", "\"seed\":7,\"sede\":1");
        assert!(matches!(ExperimentConfig::from_json(&unknown), Err(Error::Config { .. })));
        let typo = BASE.replace("\"n_ladder\":[256,1024]", "\"n_ladder\":[256,\"x\"]");
        match ExperimentConfig::from_json(&typo) {
            Err(Error::Config { field, message }) => {
                assert!(field.starts_with("n_ladder"), "{field}");
                assert!(message.contains("line"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let ladder = BASE.replace("[256,1024]", "[1024,256]");
        assert!(matches!(ExperimentConfig::from_json(&ladder), Err(Error::Config { field, .. }) if field == "n_ladder"));
    }
}
