//! Quadrature helpers: Gauss–Legendre rules, adaptive bisection on top of
//! them, geometric grading toward an integrable endpoint singularity, and
//! Euler–Maclaurin tails of power sums.

use std::f64::consts::PI;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Fixed-rule approximation of ∫_a^b f.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Result of an adaptive integration together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Adaptive bisection driven by a Gauss–Legendre rule.
///
/// A cell is accepted once the rule on the cell and on its two halves agree
/// within `abs_tol` scaled by the cell's share of the interval.
pub fn adaptive<F: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: usize,
    f: &F,
) -> Estimate {
    let whole = rule.integrate(a, b, f);
    adaptive_rec(rule, a, b, whole, abs_tol, max_depth, f)
}

fn adaptive_rec<F: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    f: &F,
) -> Estimate {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, f);
    let right = rule.integrate(mid, b, f);
    let refined = left + right;
    let err = (refined - whole).abs();
    if err <= tol || depth == 0 {
        return Estimate {
            value: refined,
            error: err,
        };
    }
    let l = adaptive_rec(rule, a, mid, left, 0.5 * tol, depth - 1, f);
    let r = adaptive_rec(rule, mid, b, right, 0.5 * tol, depth - 1, f);
    Estimate {
        value: l.value + r.value,
        error: l.error + r.error,
    }
}

/// ∫_0^top f for an integrand that may be singular (but integrable) or
/// non-smooth at 0. Cells are [top·2^{-k-1}, top·2^{-k}] for k < `levels`;
/// the remaining sliver [0, top·2^{-levels}] is dropped.
pub fn graded_to_zero<F: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    top: f64,
    levels: usize,
    rel_tol: f64,
    f: &F,
) -> Estimate {
    // coarse pass fixes the absolute tolerance
    let mut coarse = 0.0;
    for k in 0..levels {
        let hi = top * 0.5f64.powi(k as i32);
        coarse += rule.integrate(0.5 * hi, hi, f).abs();
    }
    let abs_tol = (rel_tol * coarse).max(f64::MIN_POSITIVE);
    let mut value = 0.0;
    let mut error = 0.0;
    for k in 0..levels {
        let hi = top * 0.5f64.powi(k as i32);
        let e = adaptive(rule, 0.5 * hi, hi, abs_tol / levels as f64, 30, f);
        value += e.value;
        error += e.error;
    }
    Estimate { value, error }
}

/// Σ_{q ≥ 0} (a + b q)^{-s} for a > 0, b > 0, s > 1.
///
/// The first `direct` terms are summed explicitly and the remainder is
/// obtained from the Euler–Maclaurin formula with six Bernoulli corrections.
pub fn power_sum_tail(a: f64, b: f64, s: f64, direct: usize) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0 && s > 1.0);
    let mut acc = 0.0;
    for q in 0..direct {
        acc += (a + b * q as f64).powf(-s);
    }
    let x0 = a + b * direct as f64;
    acc + euler_maclaurin_power(x0, b, s)
}

// Σ_{q≥0} (x0 + b q)^{-s} via Euler–Maclaurin at the left endpoint.
fn euler_maclaurin_power(x0: f64, b: f64, s: f64) -> f64 {
    // B_2, B_4, ..., B_12
    const BERNOULLI: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let integral = x0.powf(1.0 - s) / (b * (s - 1.0));
    let f0 = x0.powf(-s);
    let mut total = integral + 0.5 * f0;
    // f^{(m)}(0) = (-1)^m (s)_m b^m x0^{-s-m}; the correction uses odd m = 2k-1.
    let mut rising = s; // (s)_1
    let mut fact = 2.0; // (2k)!
    let ratio = b / x0;
    let mut pow = ratio; // (b/x0)^{2k-1}
    for (k, bk) in BERNOULLI.iter().enumerate() {
        let m = 2 * k + 1;
        // f^{(m)}(0) with m odd is -(s)_m b^m x0^{-s-m}
        let deriv = -rising * pow * f0;
        total -= bk / fact * deriv;
        rising *= (s + m as f64) * (s + m as f64 + 1.0);
        pow *= ratio * ratio;
        fact *= ((2 * k + 3) * (2 * k + 4)) as f64;
    }
    total
}
