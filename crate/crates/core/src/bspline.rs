//! Piecewise polynomials on unit cells and cardinal B-splines.

/// A piecewise polynomial whose pieces live on consecutive unit cells
/// `[start + i, start + i + 1)`. Piece `i` is stored as monomial
/// coefficients in the local variable `s = x - (start + i)`, lowest first.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    start: i64,
    pieces: Vec<Vec<f64>>,
}

impl PiecewisePoly {
    pub fn new(start: i64, pieces: Vec<Vec<f64>>) -> Self {
        Self { start, pieces }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.pieces.len() as i64
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    /// Local polynomial on the cell `[c, c+1)`, if inside the support.
    pub fn piece_at(&self, cell: i64) -> Option<&[f64]> {
        let idx = cell - self.start;
        if idx < 0 || idx >= self.pieces.len() as i64 {
            None
        } else {
            Some(&self.pieces[idx as usize])
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !x.is_finite() {
            return 0.0;
        }
        let cell = x.floor();
        match self.piece_at(cell as i64) {
            Some(p) => horner(p, x - cell),
            None => 0.0,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            start: self.start,
            pieces: self
                .pieces
                .iter()
                .map(|p| p.iter().map(|a| a * c).collect())
                .collect(),
        }
    }

    /// Exact ∫ p(x) dx over the support.
    pub fn integral(&self) -> f64 {
        self.pieces.iter().map(|p| integrate_unit(p)).sum()
    }

    /// Exact ∫ p(x)² dx.
    pub fn integral_of_square(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| integrate_unit(&poly_mul(p, p)))
            .sum()
    }

    /// Exact moment ∫ x^l p(x) dx.
    pub fn moment(&self, l: usize) -> f64 {
        let mut acc = 0.0;
        for (i, p) in self.pieces.iter().enumerate() {
            let origin = (self.start + i as i64) as f64;
            // x^l = (s + origin)^l expanded in s
            let mut shifted = vec![0.0; l + 1];
            let mut binom = 1.0;
            for (k, c) in shifted.iter_mut().enumerate() {
                *c = binom * origin.powi((l - k) as i32);
                binom = binom * (l - k) as f64 / (k + 1) as f64;
            }
            acc += integrate_unit(&poly_mul(p, &shifted));
        }
        acc
    }

    pub fn max_degree(&self) -> usize {
        self.pieces
            .iter()
            .map(|p| p.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn horner(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

pub(crate) fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn integrate_unit(p: &[f64]) -> f64 {
    p.iter()
        .enumerate()
        .map(|(k, c)| c / (k as f64 + 1.0))
        .sum()
}

/// Cardinal B-spline of order `m` (the m-fold self-convolution of the
/// indicator of [0,1]), supported on [0, m], as unit-cell pieces.
///
/// Built with the recursion
/// `B_m(x) = (x B_{m-1}(x) + (m - x) B_{m-1}(x - 1)) / (m - 1)`.
pub fn cardinal_bspline(m: usize) -> PiecewisePoly {
    assert!(m >= 1);
    let mut pieces: Vec<Vec<f64>> = vec![vec![1.0]];
    for order in 2..=m {
        let prev = pieces;
        let denom = (order - 1) as f64;
        let mut next = Vec::with_capacity(order);
        for i in 0..order {
            let x0 = i as f64;
            let mut poly = vec![0.0; order];
            // x B_{m-1}(x): piece i of prev, multiplied by (x0 + s)
            if i < prev.len() {
                let t = poly_mul(&prev[i], &[x0, 1.0]);
                for (k, c) in t.iter().enumerate() {
                    poly[k] += c;
                }
            }
            // (m - x) B_{m-1}(x - 1): piece i-1 of prev, times (m - x0 - s)
            if i >= 1 && i - 1 < prev.len() {
                let t = poly_mul(&prev[i - 1], &[order as f64 - x0, -1.0]);
                for (k, c) in t.iter().enumerate() {
                    poly[k] += c;
                }
            }
            for c in poly.iter_mut() {
                *c /= denom;
            }
            next.push(poly);
        }
        pieces = next;
    }
    PiecewisePoly::new(0, pieces)
}
