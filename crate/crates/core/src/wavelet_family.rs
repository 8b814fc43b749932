//! Spline-derivative wavelet family of order N.
//!
//! The scaling function is the cardinal B-spline of order N shifted to live
//! on [-N, 0]; the wavelet is the N-th derivative of the order-2N B-spline,
//! normalized to unit L² norm. Both have exact piecewise-polynomial
//! representations on unit cells, which the filter bank relies on.

use num_complex::Complex64;
use serde::Serialize;

use crate::bspline::{cardinal_bspline, PiecewisePoly};
use crate::error::{LrdError, Result};

/// The order-N spline wavelet pair (φ, ψ).
#[derive(Debug, Clone, Serialize)]
pub struct WaveletSpec {
    pub order: usize,
    /// Number of vanishing moments M (= N).
    pub vanishing_moments: usize,
    /// Fourier decay exponent α (= N).
    pub decay_exponent: f64,
    pub support_phi: (f64, f64),
    pub support_psi: (f64, f64),
    /// Common support length T = 2N.
    pub support_len: usize,
    /// Normalization constant C_N with ∫ψ² = 1.
    pub c_n: f64,
    #[serde(skip)]
    phi: PiecewisePoly,
    #[serde(skip)]
    psi: PiecewisePoly,
}

/// Builds the family of order `order`.
pub fn make_family(order: usize) -> Result<WaveletSpec> {
    if order == 0 {
        return Err(LrdError::InvalidArgument(
            "wavelet order N must be at least 1".into(),
        ));
    }
    let n = order;
    let bn = cardinal_bspline(n);
    let phi = PiecewisePoly::new(-(n as i64), bn.pieces().to_vec());

    // d^N/dx^N B_{2N}(x) = Σ_k (-1)^k C(N,k) B_N(x - k)
    let mut pieces = vec![vec![0.0; n]; 2 * n];
    let mut binom = 1.0;
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for (i, p) in bn.pieces().iter().enumerate() {
            for (c, a) in p.iter().enumerate() {
                pieces[i + k][c] += sign * binom * a;
            }
        }
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    let raw = PiecewisePoly::new(0, pieces);
    let c_n = 1.0 / raw.integral_of_square().sqrt();
    let psi = raw.scale(c_n);

    Ok(WaveletSpec {
        order: n,
        vanishing_moments: n,
        decay_exponent: n as f64,
        support_phi: (-(n as f64), 0.0),
        support_psi: (0.0, 2.0 * n as f64),
        support_len: 2 * n,
        c_n,
        phi,
        psi,
    })
}

impl WaveletSpec {
    pub fn phi_pieces(&self) -> &PiecewisePoly {
        &self.phi
    }

    pub fn psi_pieces(&self) -> &PiecewisePoly {
        &self.psi
    }

    pub fn eval_phi(&self, x: f64) -> f64 {
        self.phi.eval(x)
    }

    pub fn eval_psi(&self, x: f64) -> f64 {
        self.psi.eval(x)
    }

    /// ψ̂(ξ) = ∫ψ(t)e^{-iξt}dt = C_N (iξ)^N e^{-iNξ} (2 sin(ξ/2)/ξ)^{2N}.
    pub fn psi_hat(&self, xi: f64) -> Complex64 {
        let n = self.order as i32;
        let modulus_part = self.c_n * xi.powi(n) * sinc_half(xi).powi(2 * n);
        let phase = Complex64::i().powi(n) * Complex64::from_polar(1.0, -(n as f64) * xi);
        phase * modulus_part
    }

    /// φ̂(ξ) = e^{iNξ/2} (2 sin(ξ/2)/ξ)^N for the shifted B-spline.
    pub fn phi_hat(&self, xi: f64) -> Complex64 {
        let n = self.order as i32;
        Complex64::from_polar(sinc_half(xi).powi(n), 0.5 * n as f64 * xi)
    }

    pub fn psi_hat_abs(&self, xi: f64) -> f64 {
        let n = self.order as i32;
        self.c_n * xi.abs().powi(n) * sinc_half(xi).abs().powi(2 * n)
    }

    pub fn phi_hat_abs(&self, xi: f64) -> f64 {
        sinc_half(xi).abs().powi(self.order as i32)
    }
}

/// 2 sin(ξ/2)/ξ with its limit 1 at the origin.
pub(crate) fn sinc_half(xi: f64) -> f64 {
    if xi.abs() < 1e-6 {
        1.0 - xi * xi / 24.0
    } else {
        2.0 * (0.5 * xi).sin() / xi
    }
}
