//! M(d) models, their generalized spectral densities and the theoretical
//! scalogram σ²_j = ∫ |H_j(λ)|² f(λ) dλ.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LrdError, Result};
use crate::filter_bank::FilterBank;
use crate::quad::{graded_to_zero, GaussLegendre};

type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An M(d) process described by its memory parameter and short-range
/// spectral density f*.
#[derive(Clone)]
pub struct MdModel {
    pub d: f64,
    fstar: Density,
    pub fstar0: f64,
    /// Hölder exponent of f* at the origin, in (0, 2].
    pub beta: f64,
    /// Smallest integer K with d - K < 1/2.
    pub k: usize,
    pub bounded_fstar: bool,
}

impl fmt::Debug for MdModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MdModel")
            .field("d", &self.d)
            .field("fstar0", &self.fstar0)
            .field("beta", &self.beta)
            .field("k", &self.k)
            .field("bounded_fstar", &self.bounded_fstar)
            .finish()
    }
}

/// Integration order needed to make Δ^K X stationary.
pub fn integration_order(d: f64) -> usize {
    let k = (d - 0.5 + 1e-9).ceil();
    if k <= 0.0 {
        0
    } else {
        k as usize
    }
}

impl MdModel {
    pub fn new<F>(d: f64, fstar: F, beta: f64, bounded_fstar: bool) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !d.is_finite() {
            return Err(LrdError::InvalidArgument(format!("d = {d} is not finite")));
        }
        if !(beta > 0.0 && beta <= 2.0) {
            return Err(LrdError::InvalidArgument(format!(
                "beta = {beta} must lie in (0, 2]"
            )));
        }
        let fstar0 = fstar(0.0);
        if !(fstar0 > 0.0 && fstar0.is_finite()) {
            return Err(LrdError::InvalidArgument(format!(
                "f*(0) = {fstar0} must be positive and finite"
            )));
        }
        Ok(Self {
            d,
            fstar: Arc::new(fstar),
            fstar0,
            beta,
            k: integration_order(d),
            bounded_fstar,
        })
    }

    /// FARIMA(0, d, 0) with unit-variance innovations: f* ≡ 1/(2π).
    pub fn farima00(d: f64) -> Result<Self> {
        Self::new(d, |_| 1.0 / (2.0 * PI), 2.0, true)
    }

    pub fn fstar(&self, lambda: f64) -> f64 {
        (self.fstar)(lambda)
    }
}

/// f(λ) = |1 - e^{-iλ}|^{-2d} f*(λ) for 0 < |λ| ≤ π.
pub fn gen_spectral_density(model: &MdModel, lambda: f64) -> Result<f64> {
    if !(lambda.abs() <= PI) {
        return Err(LrdError::InvalidArgument(format!(
            "frequency {lambda} outside [-π, π]"
        )));
    }
    if lambda == 0.0 {
        if model.d > 0.0 {
            return Err(LrdError::InvalidArgument(
                "generalized spectral density has a pole at 0 for d > 0".into(),
            ));
        }
        if model.d < 0.0 {
            return Ok(0.0);
        }
        return Ok(model.fstar0);
    }
    Ok(density_unchecked(model, lambda))
}

fn density_unchecked(model: &MdModel, lambda: f64) -> f64 {
    // |1 - e^{-iλ}| = 2|sin(λ/2)|
    let base = 2.0 * (0.5 * lambda).sin().abs();
    base.powf(-2.0 * model.d) * model.fstar(lambda)
}

/// σ²_j = 2 ∫_0^π |H_j(λ)|² f(λ) dλ by graded adaptive quadrature.
pub fn theoretical_scalogram(bank: &FilterBank, model: &MdModel, j: usize) -> Result<f64> {
    let m = bank.spec().vanishing_moments as f64;
    if model.d > m {
        return Err(LrdError::InadmissibleMemory {
            d: model.d,
            lo: f64::NEG_INFINITY,
            hi: m,
        });
    }
    let filter = bank.filter(j)?;
    let rule = GaussLegendre::new(16);
    let integrand = |lam: f64| filter.dtft(lam).norm_sqr() * density_unchecked(model, lam);
    let est = graded_to_zero(&rule, PI, 60, 1e-11, &integrand);
    Ok(2.0 * est.value)
}

/// Law of the iid innovations; every law has mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationLaw {
    Gaussian,
    Uniform,
    CenteredExponential,
    Rademacher,
}

impl InnovationLaw {
    /// Excess kurtosis κ₄ = E[ξ⁴] - 3.
    pub fn fourth_cumulant(self) -> f64 {
        match self {
            InnovationLaw::Gaussian => 0.0,
            InnovationLaw::Uniform => -1.2,
            InnovationLaw::CenteredExponential => 6.0,
            InnovationLaw::Rademacher => -2.0,
        }
    }
}

impl std::str::FromStr for InnovationLaw {
    type Err = LrdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "uniform" => Ok(Self::Uniform),
            "centered_exponential" => Ok(Self::CenteredExponential),
            "rademacher" => Ok(Self::Rademacher),
            other => Err(LrdError::InvalidArgument(format!(
                "unknown innovation law '{other}'"
            ))),
        }
    }
}

/// FARIMA(0, d, 0) driven by iid innovations, truncated MA(∞) form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarimaSpec {
    pub d: f64,
    pub innovation_law: InnovationLaw,
    pub ma_truncation: usize,
    pub seed: u64,
}

/// MA(∞) coefficients of (1 - B)^{-d}: a_0 = 1, a_k = a_{k-1}(k - 1 + d)/k.
pub fn farima_coeffs(d_frac: f64, m: usize) -> Result<Vec<f64>> {
    if !(d_frac < 0.5) {
        return Err(LrdError::InvalidArgument(format!(
            "stationary FARIMA core needs d < 1/2, got {d_frac}"
        )));
    }
    if m == 0 {
        return Err(LrdError::InvalidArgument(
            "need at least one MA coefficient".into(),
        ));
    }
    let mut a = Vec::with_capacity(m);
    a.push(1.0);
    for k in 1..m {
        let prev = a[k - 1];
        a.push(prev * (k as f64 - 1.0 + d_frac) / k as f64);
    }
    Ok(a)
}
