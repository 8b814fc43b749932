//! Log-regression and local Whittle wavelet estimators of d.

use std::f64::consts::LN_2;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asymptotics::check_weights;
use crate::dwt::Scalogram;
use crate::error::{LrdError, Result};

/// Which estimator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Logreg,
    Whittle,
}

impl FromStr for EstimatorKind {
    type Err = LrdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logreg" => Ok(Self::Logreg),
            "whittle" => Ok(Self::Whittle),
            other => Err(LrdError::InvalidArgument(format!(
                "unknown estimator '{other}' (expected logreg or whittle)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Ols,
    Custom,
}

/// Scales j = L..=L+ℓ and their regression weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionConfig {
    pub lower: usize,
    pub ell: usize,
    pub weights: Vec<f64>,
    pub weight_mode: WeightMode,
}

impl RegressionConfig {
    /// Ordinary least squares weights on L..=L+ℓ.
    pub fn ols(lower: usize, ell: usize) -> Result<Self> {
        Ok(Self {
            lower,
            ell,
            weights: regression_weights(ell, None)?,
            weight_mode: WeightMode::Ols,
        })
    }

    pub fn custom(lower: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(LrdError::InvalidArgument(
                "need at least two weights".into(),
            ));
        }
        let cfg = Self {
            lower,
            ell: weights.len() - 1,
            weights,
            weight_mode: WeightMode::Custom,
        };
        check_weights(&cfg.weights, 1e-10)?;
        Ok(cfg)
    }

    pub fn validate(&self, max_scale: usize) -> Result<()> {
        if self.ell < 1 {
            return Err(LrdError::InvalidArgument("ℓ must be at least 1".into()));
        }
        if self.weights.len() != self.ell + 1 {
            return Err(LrdError::InvalidArgument(format!(
                "expected {} weights, got {}",
                self.ell + 1,
                self.weights.len()
            )));
        }
        check_weights(&self.weights, 1e-10)?;
        if self.lower + self.ell > max_scale {
            return Err(LrdError::ScaleOutOfRange {
                j: self.lower + self.ell,
                max: max_scale,
            });
        }
        Ok(())
    }
}

/// Scales j = L..=U and the bracket searched for the minimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhittleConfig {
    pub lower: usize,
    pub upper: usize,
    pub search_interval: (f64, f64),
}

impl WhittleConfig {
    pub fn new(lower: usize, upper: usize) -> Self {
        Self {
            lower,
            upper,
            search_interval: (-10.0, 10.0),
        }
    }

    pub fn validate(&self, max_scale: usize) -> Result<()> {
        if self.upper <= self.lower {
            return Err(LrdError::InvalidArgument(format!(
                "need L < U, got L = {}, U = {}",
                self.lower, self.upper
            )));
        }
        if self.upper > max_scale {
            return Err(LrdError::ScaleOutOfRange {
                j: self.upper,
                max: max_scale,
            });
        }
        let (lo, hi) = self.search_interval;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(LrdError::InvalidArgument(format!(
                "invalid search interval [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// w = D B (BᵀDB)⁻¹ b with B = [1, i]_{i=0..ℓ} and b = (0, 1/(2 log 2)).
/// `d` = `None` uses the identity (ordinary least squares).
pub fn regression_weights(ell: usize, d: Option<&[Vec<f64>]>) -> Result<Vec<f64>> {
    if ell < 1 {
        return Err(LrdError::InvalidArgument("ℓ must be at least 1".into()));
    }
    let m = ell + 1;
    let identity: Vec<Vec<f64>>;
    let dm = match d {
        Some(dm) => {
            if dm.len() != m || dm.iter().any(|r| r.len() != m) {
                return Err(LrdError::InvalidArgument(format!(
                    "weight matrix must be {m}×{m}"
                )));
            }
            dm
        }
        None => {
            identity = (0..m)
                .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            &identity
        }
    };
    // DB, an m×2 matrix
    let db: Vec<[f64; 2]> = dm
        .iter()
        .map(|row| {
            let c0: f64 = row.iter().sum();
            let c1: f64 = row.iter().enumerate().map(|(j, x)| j as f64 * x).sum();
            [c0, c1]
        })
        .collect();
    let mut g = [[0.0; 2]; 2];
    for (i, r) in db.iter().enumerate() {
        g[0][0] += r[0];
        g[0][1] += r[1];
        g[1][0] += i as f64 * r[0];
        g[1][1] += i as f64 * r[1];
    }
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let scale = g[0][0].abs().max(g[1][1].abs()).max(1.0);
    if !(det.abs() > 1e-14 * scale * scale) {
        return Err(LrdError::Singular(format!("BᵀDB has determinant {det:e}")));
    }
    let b1 = 1.0 / (2.0 * LN_2);
    // (BᵀDB)⁻¹ (0, b1)
    let x = [-g[0][1] * b1 / det, g[0][0] * b1 / det];
    Ok(db.iter().map(|r| r[0] * x[0] + r[1] * x[1]).collect())
}

fn positive_at(scalogram: &Scalogram, j: usize) -> Result<f64> {
    let max = scalogram.max_scale();
    if j > max || scalogram.count(j) == 0 {
        return Err(LrdError::ScaleOutOfRange { j, max });
    }
    let v = scalogram.sigma2(j);
    if !(v > 0.0) || !v.is_finite() {
        return Err(LrdError::NonPositiveScalogram { j, value: v });
    }
    Ok(v)
}

/// d̂ = Σ_{j=L}^{L+ℓ} w_{j-L} log σ̂²_j.
pub fn estimate_logreg(scalogram: &Scalogram, config: &RegressionConfig) -> Result<f64> {
    config.validate(scalogram.max_scale())?;
    let mut d = 0.0;
    for (i, w) in config.weights.iter().enumerate() {
        d += w * positive_at(scalogram, config.lower + i)?.ln();
    }
    Ok(d)
}

struct WhittleTerms {
    // (j, log(n_j σ̂²_j))
    terms: Vec<(f64, f64)>,
    jbar: f64,
}

fn whittle_terms(scalogram: &Scalogram, lower: usize, upper: usize) -> Result<WhittleTerms> {
    if upper <= lower {
        return Err(LrdError::InvalidArgument(format!(
            "need L < U, got L = {lower}, U = {upper}"
        )));
    }
    let mut terms = Vec::with_capacity(upper - lower + 1);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in lower..=upper {
        let v = positive_at(scalogram, j)?;
        let n = scalogram.count(j) as f64;
        terms.push((j as f64, n.ln() + v.ln()));
        num += j as f64 * n;
        den += n;
    }
    Ok(WhittleTerms {
        terms,
        jbar: num / den,
    })
}

impl WhittleTerms {
    fn contrast(&self, dp: f64) -> f64 {
        let m = self
            .terms
            .iter()
            .map(|(j, l)| l - 2.0 * dp * j * LN_2)
            .fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = self
            .terms
            .iter()
            .map(|(j, l)| (l - 2.0 * dp * j * LN_2 - m).exp())
            .sum();
        m + s.ln() + 2.0 * dp * LN_2 * self.jbar
    }

    // derivative 2 log 2 (𝒥 - Σ j p_j), p_j ∝ 2^{-2d'j} n_j σ̂²_j
    fn slope(&self, dp: f64) -> f64 {
        let m = self
            .terms
            .iter()
            .map(|(j, l)| l - 2.0 * dp * j * LN_2)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        let mut sj = 0.0;
        for (j, l) in &self.terms {
            let p = (l - 2.0 * dp * j * LN_2 - m).exp();
            s += p;
            sj += j * p;
        }
        2.0 * LN_2 * (self.jbar - sj / s)
    }
}

/// 𝒥 = Σ j n_j / Σ n_j over j = L..=U.
pub fn mean_scale(scalogram: &Scalogram, lower: usize, upper: usize) -> Result<f64> {
    Ok(whittle_terms(scalogram, lower, upper)?.jbar)
}

/// log(Σ_{j=L}^{U} 2^{-2d'j} n_j σ̂²_j) + 2d' log(2) 𝒥.
pub fn whittle_contrast(
    scalogram: &Scalogram,
    lower: usize,
    upper: usize,
    d_prime: f64,
) -> Result<f64> {
    if upper > scalogram.max_scale() {
        return Err(LrdError::ScaleOutOfRange {
            j: upper,
            max: scalogram.max_scale(),
        });
    }
    Ok(whittle_terms(scalogram, lower, upper)?.contrast(d_prime))
}

/// Minimizer of the Whittle contrast by bisection on its increasing slope.
pub fn estimate_whittle(scalogram: &Scalogram, config: &WhittleConfig) -> Result<f64> {
    config.validate(scalogram.max_scale())?;
    let t = whittle_terms(scalogram, config.lower, config.upper)?;
    let (lo0, hi0) = config.search_interval;
    if t.slope(lo0) >= 0.0 {
        return Err(LrdError::BoundarySolution {
            bound: lo0,
            lo: lo0,
            hi: hi0,
        });
    }
    if t.slope(hi0) <= 0.0 {
        return Err(LrdError::BoundarySolution {
            bound: hi0,
            lo: lo0,
            hi: hi0,
        });
    }
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = t.slope(mid);
        if g == 0.0 {
            return Ok(mid);
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// L = ⌈log₂(n)/(1+2β)⌉ + 1, clamped to [1, J-1].
pub fn default_lower_scale(n: usize, beta: f64, max_scale: usize) -> Result<usize> {
    if n < 2 {
        return Err(LrdError::InvalidArgument(format!("n = {n} is too small")));
    }
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(LrdError::InvalidArgument(format!(
            "beta = {beta} must lie in (0, 2]"
        )));
    }
    if max_scale < 2 {
        return Err(LrdError::ScaleOutOfRange {
            j: 2,
            max: max_scale,
        });
    }
    let raw = ((n as f64).log2() / (1.0 + 2.0 * beta)).ceil() as usize + 1;
    Ok(raw.clamp(1, max_scale - 1))
}

/// L (n 2^{-L})^{-1/8}, which the Whittle CLT needs to be small.
pub fn whittle_rate_indicator(n: usize, lower: usize) -> f64 {
    let eff = n as f64 * 0.5f64.powi(lower as i32);
    lower as f64 * eff.powf(-0.125)
}
