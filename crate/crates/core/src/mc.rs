//! Scale resolution shared by the CLI, and the Monte Carlo runner.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::asymptotics::{regression_variance, whittle_variance};
use crate::dwt::{max_scale, scalogram, transform, Sample, Scalogram};
use crate::error::{LrdError, Result};
use crate::estimators::{
    default_lower_scale, estimate_logreg, estimate_whittle, regression_weights, EstimatorKind,
    RegressionConfig, WhittleConfig,
};
use crate::filter_bank::{build_filters, FilterBank};
use crate::simulate::{substream_seed, SimulationPlan, Simulator};
use crate::wavelet_family::{make_family, WaveletSpec};

fn default_beta() -> f64 {
    2.0
}

/// How the scales are chosen. Unset `lower` falls back to
/// [`default_lower_scale`]; the upper end is `ell`, then `upper`, then J.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleSpec {
    #[serde(default)]
    pub lower: Option<usize>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub ell: Option<usize>,
    #[serde(default)]
    pub upper: Option<usize>,
    /// Custom regression weights; only meaningful for log-regression.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl Default for ScaleSpec {
    fn default() -> Self {
        Self {
            lower: None,
            beta: default_beta(),
            ell: None,
            upper: None,
            weights: None,
        }
    }
}

/// Estimator with every scale fixed for a given sample length.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedEstimator {
    Logreg(RegressionConfig),
    Whittle(WhittleConfig),
}

impl ResolvedEstimator {
    pub fn kind(&self) -> EstimatorKind {
        match self {
            Self::Logreg(_) => EstimatorKind::Logreg,
            Self::Whittle(_) => EstimatorKind::Whittle,
        }
    }

    pub fn lower(&self) -> usize {
        match self {
            Self::Logreg(c) => c.lower,
            Self::Whittle(c) => c.lower,
        }
    }

    pub fn upper(&self) -> usize {
        match self {
            Self::Logreg(c) => c.lower + c.ell,
            Self::Whittle(c) => c.upper,
        }
    }

    pub fn estimate(&self, s: &Scalogram) -> Result<f64> {
        match self {
            Self::Logreg(c) => estimate_logreg(s, c),
            Self::Whittle(c) => estimate_whittle(s, c),
        }
    }

    /// wᵀVw or V(d, U - L).
    pub fn asymptotic_variance(&self, spec: &WaveletSpec, d: f64) -> Result<f64> {
        match self {
            Self::Logreg(c) => regression_variance(spec, d, &c.weights),
            Self::Whittle(c) => whittle_variance(spec, d, Some(c.upper - c.lower)),
        }
    }
}

impl ScaleSpec {
    pub fn resolve(
        &self,
        kind: EstimatorKind,
        n: usize,
        support_len: usize,
    ) -> Result<ResolvedEstimator> {
        let big_j = max_scale(n, support_len)?;
        let lower = match self.lower {
            Some(l) => l,
            None => default_lower_scale(n, self.beta, big_j)?,
        };
        if lower >= big_j {
            return Err(LrdError::ScaleOutOfRange {
                j: lower + 1,
                max: big_j,
            });
        }
        let weight_ell = self.weights.as_ref().map(|w| w.len().saturating_sub(1));
        let ell = match (self.ell, self.upper, weight_ell) {
            (Some(e), Some(u), _) if u != lower + e => {
                return Err(LrdError::InvalidArgument(format!(
                    "ℓ = {e} and U = {u} disagree for L = {lower}"
                )))
            }
            (_, _, Some(w)) if self.ell.is_some_and(|e| e != w) => {
                return Err(LrdError::InvalidArgument(format!(
                    "{} weights given for ℓ = {}",
                    w + 1,
                    self.ell.unwrap_or(0)
                )))
            }
            (_, _, Some(w)) => w,
            (Some(e), _, None) => e,
            (None, Some(u), None) => u.checked_sub(lower).ok_or_else(|| {
                LrdError::InvalidArgument(format!("U = {u} is below L = {lower}"))
            })?,
            (None, None, None) => big_j - lower,
        };
        if ell < 1 {
            return Err(LrdError::InvalidArgument("need at least two scales".into()));
        }
        if lower + ell > big_j {
            return Err(LrdError::ScaleOutOfRange {
                j: lower + ell,
                max: big_j,
            });
        }
        match kind {
            EstimatorKind::Logreg => {
                let cfg = match &self.weights {
                    Some(w) => RegressionConfig::custom(lower, w.clone())?,
                    None => RegressionConfig {
                        lower,
                        ell,
                        weights: regression_weights(ell, None)?,
                        weight_mode: crate::estimators::WeightMode::Ols,
                    },
                };
                Ok(ResolvedEstimator::Logreg(cfg))
            }
            EstimatorKind::Whittle => {
                if self.weights.is_some() {
                    return Err(LrdError::InvalidArgument(
                        "custom weights apply to the log-regression estimator only".into(),
                    ));
                }
                Ok(ResolvedEstimator::Whittle(WhittleConfig::new(
                    lower,
                    lower + ell,
                )))
            }
        }
    }
}

/// Wavelet order N, filter bank and estimator for samples of length n.
pub struct Pipeline {
    pub spec: WaveletSpec,
    pub bank: FilterBank,
    pub estimator: ResolvedEstimator,
    pub n: usize,
}

impl Pipeline {
    pub fn new(order: usize, n: usize, kind: EstimatorKind, scales: &ScaleSpec) -> Result<Self> {
        let spec = make_family(order)?;
        let estimator = scales.resolve(kind, n, spec.support_len)?;
        let bank = build_filters(&spec, max_scale(n, spec.support_len)?)?;
        Ok(Self {
            spec,
            bank,
            estimator,
            n,
        })
    }

    pub fn scalogram(&self, sample: &Sample) -> Result<Scalogram> {
        if sample.len() != self.n {
            return Err(LrdError::InvalidArgument(format!(
                "pipeline built for n = {} but sample has {} values",
                self.n,
                sample.len()
            )));
        }
        Ok(scalogram(&transform(&self.bank, sample)?))
    }

    pub fn estimate(&self, sample: &Sample) -> Result<f64> {
        self.estimator.estimate(&self.scalogram(sample)?)
    }

    /// Effective sample size n 2^{-L}.
    pub fn effective_size(&self) -> f64 {
        self.n as f64 * 0.5f64.powi(self.estimator.lower() as i32)
    }
}

/// Monte Carlo experiment description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    /// Plan template; its own seed is ignored in favour of `seed`.
    pub plan: SimulationPlan,
    /// Wavelet order N.
    pub order: usize,
    pub replicates: usize,
    pub estimator: EstimatorKind,
    #[serde(default)]
    pub scales: ScaleSpec,
    pub seed: u64,
    #[serde(default)]
    pub estimates_csv: Option<PathBuf>,
    #[serde(default)]
    pub summary_json: Option<PathBuf>,
}

impl McConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(LrdError::InvalidArgument(format!(
                "need at least 2 replicates, got {}",
                self.replicates
            )));
        }
        self.plan.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub estimator: EstimatorKind,
    pub d: f64,
    pub n: usize,
    pub lower: usize,
    pub upper: usize,
    pub replicates: usize,
    pub mean_d_hat: f64,
    pub sd_d_hat: f64,
    /// n 2^{-L} times the sample variance of the estimates.
    pub scaled_var: f64,
    pub asymptotic_var: f64,
    /// Kolmogorov–Smirnov distance of √(n2^{-L})(d̂ - d)/√asymptotic_var to N(0, 1).
    pub ks_distance: f64,
    pub ks_critical_1pct: f64,
    pub estimates_path: Option<PathBuf>,
    #[serde(skip)]
    pub estimates: Vec<f64>,
}

/// sup_x |F_R(x) - Φ(x)|.
pub fn ks_distance_normal(values: &[f64]) -> f64 {
    let normal = Normal::standard();
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let r = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / r).max((i + 1) as f64 / r - f)
        })
        .fold(0.0, f64::max)
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let r = x.len() as f64;
    let mean = x.iter().sum::<f64>() / r;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, var.sqrt())
}

// First failure by replicate index, so the error does not depend on scheduling.
fn in_order(results: Vec<Result<f64>>) -> Result<Vec<f64>> {
    results
        .into_iter()
        .enumerate()
        .map(|(r, res)| {
            res.map_err(|e| LrdError::Replicate {
                replicate: r,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Runs every replicate, writes the requested files and summarizes.
pub fn run_mc(config: &McConfig) -> Result<McSummary> {
    config.validate()?;
    let pipeline = Pipeline::new(
        config.order,
        config.plan.n,
        config.estimator,
        &config.scales,
    )?;
    let d = config.plan.farima.d;
    let asymptotic_var = pipeline.estimator.asymptotic_variance(&pipeline.spec, d)?;
    let sim = Simulator::new(&config.plan)?;

    let results: Vec<Result<f64>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let sample = sim.run(substream_seed(config.seed, r as u64))?;
            pipeline.estimate(&sample)
        })
        .collect();
    let estimates = in_order(results)?;

    let (mean, sd) = mean_sd(&estimates);
    let eff = pipeline.effective_size();
    let scale = (eff / asymptotic_var).sqrt();
    let z: Vec<f64> = estimates.iter().map(|v| (v - d) * scale).collect();

    if let Some(path) = &config.estimates_csv {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "replicate,d_hat")?;
        for (r, v) in estimates.iter().enumerate() {
            writeln!(out, "{r},{v:.16e}")?;
        }
        out.flush()?;
    }
    let summary = McSummary {
        estimator: config.estimator,
        d,
        n: config.plan.n,
        lower: pipeline.estimator.lower(),
        upper: pipeline.estimator.upper(),
        replicates: config.replicates,
        mean_d_hat: mean,
        sd_d_hat: sd,
        scaled_var: eff * sd * sd,
        asymptotic_var,
        ks_distance: ks_distance_normal(&z),
        ks_critical_1pct: 1.63 / (config.replicates as f64).sqrt(),
        estimates_path: config.estimates_csv.clone(),
        estimates,
    };
    if let Some(path) = &config.summary_json {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, &summary)?;
        writeln!(out)?;
        out.flush()?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{FarimaSpec, InnovationLaw};

    fn config(d: f64, n: usize, reps: usize) -> McConfig {
        let farima = FarimaSpec {
            d,
            innovation_law: InnovationLaw::Gaussian,
            ma_truncation: 1 << 10,
            seed: 0,
        };
        McConfig {
            plan: SimulationPlan::new(farima, n),
            order: 2,
            replicates: reps,
            estimator: EstimatorKind::Logreg,
            scales: ScaleSpec {
                lower: Some(2),
                ell: Some(3),
                ..ScaleSpec::default()
            },
            seed: 11,
            estimates_csv: None,
            summary_json: None,
        }
    }

    #[test]
    fn ks_of_normal_quantiles_is_small() {
        let normal = Normal::standard();
        let r = 400;
        let q: Vec<f64> = (0..r)
            .map(|i| normal.inverse_cdf((i as f64 + 0.5) / r as f64))
            .collect();
        let ks = ks_distance_normal(&q);
        assert!((ks - 0.5 / r as f64).abs() < 1e-7, "{ks}");
        let shifted: Vec<f64> = q.iter().map(|x| x + 10.0).collect();
        assert!(ks_distance_normal(&shifted) > 0.99);
    }

    #[test]
    fn scale_resolution() {
        let t = 4;
        let n = 1 << 14;
        let r = ScaleSpec::default()
            .resolve(EstimatorKind::Whittle, n, t)
            .unwrap();
        assert_eq!(r.lower(), 4);
        assert_eq!(r.upper(), max_scale(n, t).unwrap());
        let s = ScaleSpec {
            lower: Some(5),
            upper: Some(8),
            ..ScaleSpec::default()
        };
        let r = s.resolve(EstimatorKind::Logreg, n, t).unwrap();
        assert_eq!((r.lower(), r.upper()), (5, 8));
        let s = ScaleSpec {
            lower: Some(5),
            ell: Some(2),
            upper: Some(8),
            ..ScaleSpec::default()
        };
        assert!(s.resolve(EstimatorKind::Logreg, n, t).is_err());
        let s = ScaleSpec {
            lower: Some(5),
            ell: Some(20),
            ..ScaleSpec::default()
        };
        assert!(matches!(
            s.resolve(EstimatorKind::Logreg, n, t),
            Err(LrdError::ScaleOutOfRange { .. })
        ));
        let c = 1.0 / (2.0 * std::f64::consts::LN_2);
        let s = ScaleSpec {
            lower: Some(3),
            weights: Some(vec![-c, c]),
            ..ScaleSpec::default()
        };
        let r = s.resolve(EstimatorKind::Logreg, n, t).unwrap();
        assert_eq!(r.upper(), 4);
        assert!(s.resolve(EstimatorKind::Whittle, n, t).is_err());
        assert!(matches!(
            ScaleSpec::default().resolve(EstimatorKind::Logreg, 3, t),
            Err(LrdError::SampleTooShort { .. })
        ));
    }

    #[test]
    fn replicates_must_be_at_least_two() {
        assert!(run_mc(&config(0.2, 512, 1)).is_err());
    }

    #[test]
    fn mc_is_deterministic_and_ordered() {
        let cfg = config(0.2, 1024, 12);
        let a = run_mc(&cfg).unwrap();
        let b = run_mc(&cfg).unwrap();
        assert_eq!(a.estimates, b.estimates);
        assert_eq!(a.estimates.len(), 12);
        // replicate r is the path drawn from substream r
        let pipeline = Pipeline::new(2, 1024, EstimatorKind::Logreg, &cfg.scales).unwrap();
        let sim = Simulator::new(&cfg.plan).unwrap();
        let third = pipeline
            .estimate(&sim.run(substream_seed(11, 3)).unwrap())
            .unwrap();
        assert_eq!(third, a.estimates[3]);
        assert!(a.sd_d_hat > 0.0);
    }

    #[test]
    fn replicate_failure_names_the_index() {
        let results = vec![
            Ok(0.1),
            Err(LrdError::NonPositiveScalogram { j: 3, value: 0.0 }),
            Ok(0.2),
            Err(LrdError::Singular("late".into())),
        ];
        match in_order(results) {
            Err(LrdError::Replicate { replicate, source }) => {
                assert_eq!(replicate, 1);
                assert!(matches!(
                    *source,
                    LrdError::NonPositiveScalogram { j: 3, .. }
                ));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(in_order(vec![Ok(1.0), Ok(2.0)]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(0.1, 1024, 3);
        cfg.estimates_csv = Some(dir.path().join("est.csv"));
        cfg.summary_json = Some(dir.path().join("summary.json"));
        let s = run_mc(&cfg).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("est.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "replicate,d_hat");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("1,"));
        let json: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("summary.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(json["replicates"], 3);
        assert!((json["mean_d_hat"].as_f64().unwrap() - s.mean_d_hat).abs() < 1e-15);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = config(0.25, 2048, 3);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(McConfig::from_json(&text).unwrap(), cfg);
        assert!(McConfig::from_json("{\"plan\": 3}").is_err());
    }
}
