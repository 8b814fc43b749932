//! Limit quantities of the scalogram and estimator CLTs: K_ψ(d), the
//! vector densities D_u(λ; d), I_u(d), the covariance D_{u,u'}, the
//! regression variance matrix V and the Whittle variances V(d, ℓ).
//!
//! For the spline family, |ψ̂(ξ)| = C_N 2^{2N} sin^{2N}(ξ/2) |ξ|^{-N}, which
//! turns every lattice sum into sums of |η + 2πq|^{-s} with s = 2d + 2N.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{LrdError, Result};
use crate::quad::{adaptive, graded_to_zero, power_sum_tail, GaussLegendre};
use crate::wavelet_family::WaveletSpec;

// explicit terms before the Euler–Maclaurin tail in lattice sums
const LATTICE_DIRECT: usize = 16;
// I_u by direct quadrature up to this u, by the large-u expansion beyond
const DIRECT_MAX_U: usize = 8;
// periods of sin^{4N}(ξ/2) integrated numerically in K_ψ
const KPSI_PERIODS: usize = 64;

/// Checks 1/2 - α < d ≤ M.
pub fn check_admissible(spec: &WaveletSpec, d: f64) -> Result<()> {
    let lo = 0.5 - spec.decay_exponent;
    let hi = spec.vanishing_moments as f64;
    if !(d > lo && d <= hi) {
        return Err(LrdError::InadmissibleMemory { d, lo, hi });
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// Coefficients of sin^{2m}(x) = c_0 + Σ_{r=1}^{m} c_r cos(2rx).
fn sin_power_cosines(m: usize) -> Vec<f64> {
    let scale = 0.5f64.powi(2 * m as i32);
    (0..=m)
        .map(|r| {
            let b = binomial(2 * m, m - r) * scale;
            if r == 0 {
                b
            } else if r % 2 == 0 {
                2.0 * b
            } else {
                -2.0 * b
            }
        })
        .collect()
}

/// Γ(z) cos(πz/2), finite except at z = 0, -2, -4, ...
fn gamma_cos(z: f64) -> f64 {
    if z > 0.5 {
        gamma(z) * (0.5 * PI * z).cos()
    } else {
        PI / (2.0 * gamma(1.0 - z) * (0.5 * PI * z).sin())
    }
}

/// Evaluates an analytic `f` at `z`, stepping around the removable
/// singularities at nonpositive even integers with a symmetric
/// Richardson-extrapolated average.
fn across_even_poles<F: Fn(f64) -> f64>(z: f64, f: F) -> f64 {
    let nearest = (z / 2.0).round() * 2.0;
    if nearest > 0.0 || (z - nearest).abs() > 1e-4 {
        return f(z);
    }
    let h = 3e-4;
    let m1 = 0.5 * (f(z + h) + f(z - h));
    let m2 = 0.5 * (f(z + 2.0 * h) + f(z - 2.0 * h));
    (4.0 * m1 - m2) / 3.0
}

/// Σ_{q ≥ 0} (a + bq)^{-s}.
fn lattice(a: f64, b: f64, s: f64) -> f64 {
    power_sum_tail(a, b, s, LATTICE_DIRECT)
}

fn riemann_zeta(x: f64) -> f64 {
    lattice(1.0, 1.0, x)
}

/// Value and diagnostics of K_ψ(d).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KPsi {
    pub value: f64,
    /// Quadrature error estimate.
    pub error: f64,
    /// Analytic contribution of |ξ| > Ξ.
    pub tail: f64,
    pub cutoff: f64,
}

/// K_ψ(d) = ∫ |ξ|^{-2d} |ψ̂(ξ)|² dξ.
pub fn k_psi(spec: &WaveletSpec, d: f64) -> Result<f64> {
    Ok(k_psi_detailed(spec, d)?.value)
}

pub fn k_psi_detailed(spec: &WaveletSpec, d: f64) -> Result<KPsi> {
    check_admissible(spec, d)?;
    let n = spec.order;
    let s = 2.0 * d + 2.0 * n as f64;
    let pref = 2.0 * spec.c_n * spec.c_n * 2f64.powi(4 * n as i32);
    // ξ^{-s} sin^{4N}(ξ/2) on (0, ∞)
    let f = |xi: f64| xi.powf(-s) * (0.5 * xi).sin().powi(4 * n as i32);
    let rule = GaussLegendre::new(16);
    let first = graded_to_zero(&rule, 2.0 * PI, 60, 1e-13, &f);
    let mut value = first.value;
    let mut error = first.error;
    let tol = 1e-15 * first.value.abs().max(f64::MIN_POSITIVE);
    for k in 1..KPSI_PERIODS {
        let a = 2.0 * PI * k as f64;
        let e = adaptive(&rule, a, a + 2.0 * PI, tol, 12, &f);
        value += e.value;
        error += e.error;
    }
    let cutoff = 2.0 * PI * KPSI_PERIODS as f64;
    let c = sin_power_cosines(2 * n);
    let mut tail = c[0] * cutoff.powf(1.0 - s) / (s - 1.0);
    for (r, cr) in c.iter().enumerate().skip(1) {
        tail += cr * cosine_power_tail(r as f64, s, cutoff);
    }
    value += tail;
    Ok(KPsi {
        value: pref * value,
        error: pref * error,
        tail: pref * tail,
        cutoff,
    })
}

// ∫_Ξ^∞ cos(rξ) ξ^{-s} dξ for rΞ ∈ 2πℤ, by repeated integration by parts.
fn cosine_power_tail(r: f64, s: f64, cutoff: f64) -> f64 {
    let mut total = 0.0;
    let mut rising = s;
    let mut term_pow = cutoff.powf(-s - 1.0) / (r * r);
    let mut sign = 1.0;
    for k in 0..12 {
        let term = sign * rising * term_pow;
        total += term;
        if term.abs() <= 1e-18 * total.abs() {
            break;
        }
        let a = s + (2 * k + 1) as f64;
        rising *= a * (a + 1.0);
        term_pow /= cutoff * cutoff * r * r;
        sign = -sign;
    }
    total
}

/// |ξ|^{-2d} e_u(ξ) conj(ψ̂(ξ)) ψ̂(2^{-u} ξ): one lattice term of D_u.
fn lattice_term(spec: &WaveletSpec, u: usize, d: f64, xi: f64) -> Vec<Complex64> {
    let dim = 1usize << u;
    let scale = 0.5f64.powi(u as i32);
    let common = xi.abs().powf(-2.0 * d) * spec.psi_hat(xi).conj() * spec.psi_hat(scale * xi);
    let norm = scale.sqrt();
    (0..dim)
        .map(|k| common * Complex64::from_polar(norm, -(k as f64) * scale * xi))
        .collect()
}

/// D_{ψ,u}(λ; d) ∈ ℂ^{2^u}.
pub fn d_vector(spec: &WaveletSpec, u: usize, lambda: f64, d: f64) -> Result<Vec<Complex64>> {
    d_vector_with(spec, u, lambda, d, LATTICE_DIRECT)
}

/// Same as [`d_vector`] with `direct` explicit terms per residue class
/// before the Euler–Maclaurin tail.
pub fn d_vector_with(
    spec: &WaveletSpec,
    u: usize,
    lambda: f64,
    d: f64,
    direct: usize,
) -> Result<Vec<Complex64>> {
    check_admissible(spec, d)?;
    if !(lambda.abs() < PI) {
        return Err(LrdError::InvalidArgument(format!(
            "frequency {lambda} outside (-π, π)"
        )));
    }
    if u > 16 {
        return Err(LrdError::InvalidArgument(format!("u = {u} is too large")));
    }
    let s = 2.0 * d + 2.0 * spec.order as f64;
    let period = 1usize << u;
    let step = 2.0 * PI * period as f64;
    let mut out = if lambda == 0.0 {
        vec![Complex64::new(0.0, 0.0); period]
    } else {
        lattice_term(spec, u, d, lambda)
    };
    // within a residue class mod 2^u and a fixed sign of λ + 2πl the term
    // is a fixed vector times |λ + 2πl|^{-s}
    for r in 1..=period {
        for sign in [1.0, -1.0] {
            let xi = lambda + sign * 2.0 * PI * r as f64;
            let a = xi.abs();
            let class = lattice_term(spec, u, d, xi);
            let weight = power_sum_tail(a, step, s, direct) * a.powf(s);
            for (o, c) in out.iter_mut().zip(class) {
                *o += c * weight;
            }
        }
    }
    Ok(out)
}

/// Evaluator of I_u(d) = ∫_{-π}^{π} |D_u(λ; d)|² dλ for all u at fixed d.
///
/// After collapsing residue classes,
/// I_u = 2^{u(1-2N-4d)} C_N⁴ 2^{8N} ∫_{-π}^{π} sin^{4N}(2^{u-1}η) G(η) dη with
/// G(η) = sin^{4N}(η/2) (Σ_q |η + 2πq|^{-s})², which does not depend on u.
pub struct LatticeIntegrals {
    order: usize,
    d: f64,
    s: f64,
    prefactor: f64,
    cosines: Vec<f64>,
    // G(η) ≈ Σ a_i η^{γ_i} near 0
    singular: Vec<(f64, f64)>,
    regular_part: f64,
    regular_error: f64,
    rule: GaussLegendre,
}

/// One I_u value with its numerical error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IuValue {
    pub u: usize,
    pub value: f64,
    pub error: f64,
}

impl LatticeIntegrals {
    pub fn new(spec: &WaveletSpec, d: f64) -> Result<Self> {
        check_admissible(spec, d)?;
        let n = spec.order;
        let s = 2.0 * d + 2.0 * n as f64;
        let c4 = spec.c_n.powi(4);
        let mut me = Self {
            order: n,
            d,
            s,
            prefactor: c4 * 2f64.powi(8 * n as i32),
            cosines: sin_power_cosines(2 * n),
            singular: Vec::new(),
            regular_part: 0.0,
            regular_error: 0.0,
            rule: GaussLegendre::new(16),
        };
        me.singular = me.singular_expansion();
        let rem = |eta: f64| {
            let p: f64 = me.singular.iter().map(|(a, g)| a * eta.powf(*g)).sum();
            me.g(eta) - p
        };
        // G - P = O((η/2π)^{14} G) near 0, where subtracting is pure
        // cancellation, so the remainder is integrated on [π/64, π] only
        let mut value = 0.0;
        let mut error = 0.0;
        for k in 0..6 {
            let hi = PI * 0.5f64.powi(k);
            let lo = 0.5 * hi;
            let scale = me.rule.integrate(lo, hi, |x| me.g(x).abs());
            let e = adaptive(&me.rule, lo, hi, 1e-14 * scale, 12, &rem);
            value += e.value;
            error += e.error;
        }
        me.regular_part = value;
        me.regular_error = error;
        Ok(me)
    }

    // Σ_{q≠0} |η + 2πq|^{-s}
    fn lattice_rest(&self, eta: f64) -> f64 {
        lattice(2.0 * PI + eta, 2.0 * PI, self.s) + lattice(2.0 * PI - eta, 2.0 * PI, self.s)
    }

    fn g(&self, eta: f64) -> f64 {
        let a = eta.abs().powf(-self.s) + self.lattice_rest(eta);
        (0.5 * eta).sin().powi(4 * self.order as i32) * a * a
    }

    /// Terms a η^γ of G near 0 with γ below the leading exponent + 14.
    fn singular_expansion(&self) -> Vec<(f64, f64)> {
        let n = self.order;
        let d = self.d;
        let s = self.s;
        let kmax = 10;
        // sin(η/2)/η = Σ_m (-1)^m η^{2m} / (2^{2m+1} (2m+1)!)
        let mut base = Vec::with_capacity(kmax);
        let mut fact = 1.0;
        for m in 0..kmax {
            if m > 0 {
                fact *= ((2 * m) * (2 * m + 1)) as f64;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            base.push(sign / (2f64.powi(2 * m as i32 + 1) * fact));
        }
        let mut sigma = vec![1.0];
        for _ in 0..4 * n {
            sigma = series_mul(&sigma, &base, kmax);
        }
        // R(η) = 2 Σ_k (s)_{2k}/(2k)! (2π)^{-s-2k} ζ(s+2k) η^{2k}
        let mut rser = Vec::with_capacity(kmax);
        let mut coef = 1.0;
        for k in 0..kmax {
            if k > 0 {
                let a = s + (2 * k - 2) as f64;
                coef *= a * (a + 1.0) / ((2 * k - 1) * (2 * k)) as f64;
            }
            let x = s + 2.0 * k as f64;
            rser.push(2.0 * coef * (2.0 * PI).powf(-x) * riemann_zeta(x));
        }
        let tau = series_mul(&sigma, &rser, kmax);
        let lead = -4.0 * d;
        let limit = lead + 14.0;
        let mut out = Vec::new();
        for (k, a) in sigma.iter().enumerate() {
            let g = 2.0 * k as f64 - 4.0 * d;
            if g < limit {
                out.push((*a, g));
            }
        }
        for (k, a) in tau.iter().enumerate() {
            let g = 2.0 * k as f64 + 2.0 * n as f64 - 2.0 * d;
            if g < limit {
                out.push((2.0 * a, g));
            }
        }
        out
    }

    fn scale_factor(&self, u: usize) -> f64 {
        let n = self.order as f64;
        2f64.powf(u as f64 * (1.0 - 2.0 * n - 4.0 * self.d)) * self.prefactor * 2.0
    }

    /// I_u(d) with an error estimate.
    pub fn i_u(&self, u: usize) -> IuValue {
        let (j, err) = if u <= DIRECT_MAX_U {
            self.oscillatory_direct(u)
        } else {
            (
                self.oscillatory_expansion(u),
                self.regular_error * self.cosines[0],
            )
        };
        let f = self.scale_factor(u);
        IuValue {
            u,
            value: f * j,
            error: f * err,
        }
    }

    /// I_u by quadrature over each period of the oscillating factor.
    pub fn i_u_direct(&self, u: usize) -> IuValue {
        let (j, err) = self.oscillatory_direct(u);
        let f = self.scale_factor(u);
        IuValue {
            u,
            value: f * j,
            error: f * err,
        }
    }

    /// I_u by the large-u expansion.
    pub fn i_u_expansion(&self, u: usize) -> f64 {
        self.scale_factor(u) * self.oscillatory_expansion(u)
    }

    // ∫_0^π sin^{4N}(2^{u-1}η) G(η) dη
    fn oscillatory_direct(&self, u: usize) -> (f64, f64) {
        let freq = 2f64.powi(u as i32 - 1);
        let pow = 4 * self.order as i32;
        let f = |eta: f64| (freq * eta).sin().powi(pow) * self.g(eta);
        let periods = if u == 0 { 1 } else { 1usize << (u - 1) };
        let width = PI / periods as f64;
        let first = graded_to_zero(&self.rule, width, 60, 1e-13, &f);
        let mut coarse = first.value.abs();
        for p in 1..periods {
            let a = p as f64 * width;
            coarse += self.rule.integrate(a, a + width, f).abs();
        }
        let tol = 1e-14 * coarse / periods as f64;
        let mut value = first.value;
        let mut error = first.error;
        for p in 1..periods {
            let a = p as f64 * width;
            let e = adaptive(&self.rule, a, a + width, tol, 12, &f);
            value += e.value;
            error += e.error;
        }
        (value, error)
    }

    // c_0 · FP∫_0^π G + Σ_i a_i Γ(z_i) cos(πz_i/2) Σ_r c_r (r 2^u)^{-z_i}
    fn oscillatory_expansion(&self, u: usize) -> f64 {
        let c = &self.cosines;
        let base = 2f64.powi(u as i32);
        let mut total = c[0] * self.regular_part;
        for &(a, g) in &self.singular {
            let term = |z: f64| {
                let mut osc = 0.0;
                for (r, cr) in c.iter().enumerate().skip(1) {
                    osc += cr * (r as f64 * base).powf(-z);
                }
                c[0] * PI.powf(z) / z + gamma_cos(z) * osc
            };
            total += a * across_even_poles(g + 1.0, term);
        }
        total
    }
}

fn series_mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len.min(a.len() + b.len() - 1)];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if i + j < out.len() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// I_u(d) = ∫_{-π}^{π} |D_u(λ; d)|² dλ.
pub fn i_u(spec: &WaveletSpec, u: usize, d: f64) -> Result<f64> {
    Ok(LatticeIntegrals::new(spec, d)?.i_u(u).value)
}

fn i_values(spec: &WaveletSpec, d: f64, ell: usize) -> Result<Vec<f64>> {
    let lat = LatticeIntegrals::new(spec, d)?;
    Ok((0..=ell).map(|u| lat.i_u(u).value).collect())
}

pub type Matrix = Vec<Vec<f64>>;

/// D_{u,u'} = 4π f*(0)² 2^{4d(u∨u') + u∧u'} I_{|u-u'|}(d), 0 ≤ u, u' ≤ ℓ.
pub fn cov_matrix(spec: &WaveletSpec, d: f64, fstar0: f64, ell: usize) -> Result<Matrix> {
    if !(fstar0 > 0.0 && fstar0.is_finite()) {
        return Err(LrdError::InvalidArgument(format!(
            "f*(0) = {fstar0} must be positive"
        )));
    }
    let iv = i_values(spec, d, ell)?;
    Ok(cov_from(&iv, d, fstar0, ell))
}

fn cov_from(iv: &[f64], d: f64, fstar0: f64, ell: usize) -> Matrix {
    (0..=ell)
        .map(|u| {
            (0..=ell)
                .map(|v| {
                    let e = 4.0 * d * u.max(v) as f64 + u.min(v) as f64;
                    4.0 * PI * fstar0 * fstar0 * 2f64.powf(e) * iv[u.abs_diff(v)]
                })
                .collect()
        })
        .collect()
}

/// V_{i,j} = 4π 2^{2d|j-i|} 2^{i∧j} I_{|j-i|}(d) / K_ψ(d)².
pub fn variance_matrix(spec: &WaveletSpec, d: f64, ell: usize) -> Result<Matrix> {
    let iv = i_values(spec, d, ell)?;
    let k = k_psi(spec, d)?;
    Ok(v_from(&iv, d, k, ell))
}

fn v_from(iv: &[f64], d: f64, k: f64, ell: usize) -> Matrix {
    (0..=ell)
        .map(|i| {
            (0..=ell)
                .map(|j| {
                    let e = 2.0 * d * i.abs_diff(j) as f64 + i.min(j) as f64;
                    4.0 * PI * 2f64.powf(e) * iv[i.abs_diff(j)] / (k * k)
                })
                .collect()
        })
        .collect()
}

pub fn quadratic_form(m: &Matrix, w: &[f64]) -> f64 {
    m.iter()
        .zip(w)
        .map(|(row, wi)| wi * row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

/// Checks Σ w_i = 0 and 2 log 2 Σ i w_i = 1 within `tol`.
pub fn check_weights(w: &[f64], tol: f64) -> Result<()> {
    let sum: f64 = w.iter().sum();
    let slope: f64 =
        2.0 * LN_2 * w.iter().enumerate().map(|(i, x)| i as f64 * x).sum::<f64>() - 1.0;
    if w.len() < 2 || sum.abs() > tol || slope.abs() > tol {
        return Err(LrdError::WeightConstraint { sum, slope });
    }
    Ok(())
}

/// wᵀ V w, the limit variance of √(n2^{-L}) (d̂ - d).
pub fn regression_variance(spec: &WaveletSpec, d: f64, w: &[f64]) -> Result<f64> {
    check_weights(w, 1e-10)?;
    let v = variance_matrix(spec, d, w.len() - 1)?;
    Ok(quadratic_form(&v, w))
}

/// η_ℓ = Σ_{j≤ℓ} j 2^{-j} / (2 - 2^{-ℓ}).
pub fn eta(ell: usize) -> f64 {
    let norm = 2.0 - 0.5f64.powi(ell as i32);
    (0..=ell)
        .map(|j| j as f64 * 0.5f64.powi(j as i32))
        .sum::<f64>()
        / norm
}

/// κ_ℓ = Σ_{j≤ℓ} (j - η_ℓ)² 2^{-j} / (2 - 2^{-ℓ}).
pub fn kappa(ell: usize) -> f64 {
    let norm = 2.0 - 0.5f64.powi(ell as i32);
    let e = eta(ell);
    (0..=ell)
        .map(|j| (j as f64 - e).powi(2) * 0.5f64.powi(j as i32))
        .sum::<f64>()
        / norm
}

/// Weights w̃ with √(n2^{-L})(d̃ - d) ≈ Σ_u w̃_u (σ̂²_{L+u}/σ²_{L+u} - 1).
pub fn whittle_weights(ell: usize) -> Vec<f64> {
    let norm = 2.0 - 0.5f64.powi(ell as i32);
    let e = eta(ell);
    let k = kappa(ell);
    (0..=ell)
        .map(|u| 0.5f64.powi(u as i32) * (u as f64 - e) / (norm * k * 2.0 * LN_2))
        .collect()
}

/// Truncation record of the ℓ = ∞ series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesTruncation {
    pub terms: usize,
    pub last_increment: f64,
}

/// V(d, ℓ) for finite ℓ ≥ 1, or V(d, ∞) when `ell` is `None`.
pub fn whittle_variance(spec: &WaveletSpec, d: f64, ell: Option<usize>) -> Result<f64> {
    let lat = LatticeIntegrals::new(spec, d)?;
    let k = k_psi(spec, d)?;
    match ell {
        Some(l) => whittle_finite(&lat, k, d, l),
        None => Ok(whittle_infinite(&lat, k, d)?.0),
    }
}

fn whittle_finite(lat: &LatticeIntegrals, k: f64, d: f64, ell: usize) -> Result<f64> {
    if ell == 0 {
        return Err(LrdError::InvalidArgument(
            "Whittle variance needs ℓ ≥ 1".into(),
        ));
    }
    let norm = 2.0 - 0.5f64.powi(ell as i32);
    let e = eta(ell);
    let kap = kappa(ell);
    let mut inner = lat.i_u(0).value;
    for u in 1..=ell {
        let mut c = 0.0;
        for i in 0..=(ell - u) {
            c += 0.5f64.powi(i as i32) / norm * (i as f64 - e) * ((i + u) as f64 - e);
        }
        inner += 2.0 / kap * lat.i_u(u).value * 2f64.powf((2.0 * d - 1.0) * u as f64) * c;
    }
    Ok(PI / (norm * kap * (LN_2 * k).powi(2)) * inner)
}

fn whittle_infinite(lat: &LatticeIntegrals, k: f64, d: f64) -> Result<(f64, SeriesTruncation)> {
    if !(d < 0.5) {
        return Err(LrdError::InadmissibleMemory {
            d,
            lo: f64::NEG_INFINITY,
            hi: 0.5,
        });
    }
    let mut sum = lat.i_u(0).value;
    let mut last = 0.0;
    let mut terms = 1;
    for u in 1..=200 {
        let inc = 2.0 * lat.i_u(u).value * 2f64.powf((2.0 * d - 1.0) * u as f64);
        sum += inc;
        last = inc;
        terms = u + 1;
        if inc.abs() < 1e-12 * sum.abs() {
            break;
        }
    }
    let v = PI / (2.0 * LN_2 * k).powi(2) * sum;
    Ok((
        v,
        SeriesTruncation {
            terms,
            last_increment: last,
        },
    ))
}

/// Every limit quantity at one (d, ℓ).
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub d: f64,
    pub spec: WaveletSpec,
    pub fstar0: f64,
    pub k_psi: KPsi,
    pub i_u: Vec<IuValue>,
    pub cov: Matrix,
    pub v: Matrix,
    pub ell: usize,
    pub eta_ell: f64,
    pub kappa_ell: f64,
    pub whittle_var_ell: f64,
    /// Absent when d ≥ 1/2.
    pub whittle_var_inf: Option<f64>,
    pub inf_series: Option<SeriesTruncation>,
    /// Regression weights used for `regression_var`, if any.
    pub weights: Option<Vec<f64>>,
    pub regression_var: Option<f64>,
}

/// Builds the report; `weights` (length ℓ + 1) adds wᵀVw.
pub fn asymptotics_report(
    spec: &WaveletSpec,
    d: f64,
    fstar0: f64,
    ell: usize,
    weights: Option<&[f64]>,
) -> Result<AsymptoticsReport> {
    if ell == 0 {
        return Err(LrdError::InvalidArgument("ℓ must be at least 1".into()));
    }
    if !(fstar0 > 0.0 && fstar0.is_finite()) {
        return Err(LrdError::InvalidArgument(format!(
            "f*(0) = {fstar0} must be positive"
        )));
    }
    let kp = k_psi_detailed(spec, d)?;
    let lat = LatticeIntegrals::new(spec, d)?;
    let iu: Vec<IuValue> = (0..=ell).map(|u| lat.i_u(u)).collect();
    let iv: Vec<f64> = iu.iter().map(|x| x.value).collect();
    let cov = cov_from(&iv, d, fstar0, ell);
    let v = v_from(&iv, d, kp.value, ell);
    let whittle_var_ell = whittle_finite(&lat, kp.value, d, ell)?;
    let (whittle_var_inf, inf_series) = if d < 0.5 {
        let (val, tr) = whittle_infinite(&lat, kp.value, d)?;
        (Some(val), Some(tr))
    } else {
        (None, None)
    };
    let (weights, regression_var) = match weights {
        Some(w) => {
            if w.len() != ell + 1 {
                return Err(LrdError::InvalidArgument(format!(
                    "expected {} weights, got {}",
                    ell + 1,
                    w.len()
                )));
            }
            check_weights(w, 1e-10)?;
            (Some(w.to_vec()), Some(quadratic_form(&v, w)))
        }
        None => (None, None),
    };
    Ok(AsymptoticsReport {
        d,
        spec: spec.clone(),
        fstar0,
        k_psi: kp,
        i_u: iu,
        cov,
        v,
        ell,
        eta_ell: eta(ell),
        kappa_ell: kappa(ell),
        whittle_var_ell,
        whittle_var_inf,
        inf_series,
        weights,
        regression_var,
    })
}
