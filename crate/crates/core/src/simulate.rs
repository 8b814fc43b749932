//! Simulation of linear M(d) processes: a truncated-MA FARIMA(0, d-K, 0)
//! core driven by iid innovations, integrated K times.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dwt::Sample;
use crate::error::{LrdError, Result};
use crate::spectral::{farima_coeffs, integration_order, FarimaSpec, InnovationLaw};

/// Default number of retained MA coefficients.
pub const DEFAULT_TRUNCATION: usize = 1 << 16;

// direct convolution below this many multiply-adds
const DIRECT_WORK_LIMIT: usize = 1 << 22;

/// Everything needed to draw one sample path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub farima: FarimaSpec,
    pub n: usize,
    pub burn_in: usize,
    /// Integration order K; the stationary core has memory d - K.
    pub k: usize,
}

impl SimulationPlan {
    /// Plan with the smallest admissible K and burn-in equal to the truncation.
    pub fn new(farima: FarimaSpec, n: usize) -> Self {
        let k = integration_order(farima.d);
        let burn_in = farima.ma_truncation;
        Self {
            farima,
            n,
            burn_in,
            k,
        }
    }

    pub fn seed(&self) -> u64 {
        self.farima.seed
    }

    /// Memory parameter of the stationary core.
    pub fn d_frac(&self) -> f64 {
        self.farima.d - self.k as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(LrdError::InvalidArgument(
                "sample length must be positive".into(),
            ));
        }
        if self.farima.ma_truncation == 0 {
            return Err(LrdError::InvalidArgument(
                "MA truncation must be positive".into(),
            ));
        }
        if !(self.d_frac() < 0.5) {
            return Err(LrdError::InvalidArgument(format!(
                "d - K = {} must be below 1/2",
                self.d_frac()
            )));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer; a bijection on u64.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `r` derived from a base seed:
/// `splitmix64(seed + r · 0x9E3779B97F4A7C15)`, injective in `r`.
pub fn substream_seed(seed: u64, replicate: u64) -> u64 {
    splitmix64(seed.wrapping_add(replicate.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// `count` iid draws with mean 0 and variance 1.
pub fn draw_innovations(law: InnovationLaw, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sqrt3 = 3f64.sqrt();
    (0..count)
        .map(|_| match law {
            InnovationLaw::Gaussian => StandardNormal.sample(&mut rng),
            InnovationLaw::Uniform => sqrt3 * (2.0 * rng.random::<f64>() - 1.0),
            InnovationLaw::CenteredExponential => {
                let e: f64 = Exp1.sample(&mut rng);
                e - 1.0
            }
            InnovationLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .collect()
}

/// Reusable simulator for one plan template; only the seed varies per path.
pub struct Simulator {
    plan: SimulationPlan,
    coeffs: Vec<f64>,
    fft: Option<FftConvolver>,
}

struct FftConvolver {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel: Vec<Complex64>,
}

impl Simulator {
    pub fn new(plan: &SimulationPlan) -> Result<Self> {
        plan.validate()?;
        let mut coeffs = farima_coeffs(plan.d_frac(), plan.farima.ma_truncation)?;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        let total = plan.n + plan.burn_in;
        let fft = if coeffs.len().saturating_mul(total) <= DIRECT_WORK_LIMIT {
            None
        } else {
            // circular convolution is exact on the kept window once the
            // buffer covers the presample that would otherwise wrap around
            let wrap = (coeffs.len() - 1).saturating_sub(plan.burn_in);
            let len = (total + wrap).max(coeffs.len()).next_power_of_two();
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(len);
            let inverse = planner.plan_fft_inverse(len);
            let mut kernel = vec![Complex64::new(0.0, 0.0); len];
            for (k, a) in coeffs.iter().enumerate() {
                kernel[k].re = *a;
            }
            forward.process(&mut kernel);
            Some(FftConvolver {
                len,
                forward,
                inverse,
                kernel,
            })
        };
        Ok(Self {
            plan: plan.clone(),
            coeffs,
            fft,
        })
    }

    pub fn plan(&self) -> &SimulationPlan {
        &self.plan
    }

    /// Stationary core Y_t (after burn-in), before integration.
    pub fn core(&self, seed: u64) -> Vec<f64> {
        let n = self.plan.n;
        let burn = self.plan.burn_in;
        let xi = draw_innovations(self.plan.farima.innovation_law, n + burn, seed);
        match &self.fft {
            None => (burn..burn + n)
                .map(|t| {
                    let upto = t.min(self.coeffs.len() - 1);
                    (0..=upto).map(|k| self.coeffs[k] * xi[t - k]).sum()
                })
                .collect(),
            Some(conv) => {
                let mut buf = vec![Complex64::new(0.0, 0.0); conv.len];
                for (b, v) in buf.iter_mut().zip(&xi) {
                    b.re = *v;
                }
                conv.forward.process(&mut buf);
                for (b, k) in buf.iter_mut().zip(&conv.kernel) {
                    *b *= k;
                }
                conv.inverse.process(&mut buf);
                let scale = 1.0 / conv.len as f64;
                buf[burn..burn + n].iter().map(|c| c.re * scale).collect()
            }
        }
    }

    /// One path X with Δ^K X equal to the core (zero integration constants).
    pub fn run(&self, seed: u64) -> Result<Sample> {
        let mut x = self.core(seed);
        for _ in 0..self.plan.k {
            let mut acc = 0.0;
            for v in x.iter_mut() {
                acc += *v;
                *v = acc;
            }
        }
        Sample::new(x)
    }
}

/// Simulates one path according to `plan` with the plan's own seed.
pub fn simulate_md(plan: &SimulationPlan) -> Result<Sample> {
    Simulator::new(plan)?.run(plan.seed())
}
