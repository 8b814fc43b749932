//! Per-scale filters h_{j,l} = 2^{-j/2} ∫ φ(t + l) ψ(2^{-j} t) dt.
//!
//! Both factors are piecewise polynomials with integer breakpoints, so each
//! tap is integrated exactly with a Gauss–Legendre rule on unit cells.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bspline::horner;
use crate::error::{LrdError, Result};
use crate::quad::GaussLegendre;
use crate::wavelet_family::WaveletSpec;

/// A dense filter h_{j,·}: `taps[i]` is the coefficient at index `offset + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    pub offset: i64,
    pub taps: Vec<f64>,
}

impl Filter {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Coefficient at index `l` (zero outside the stored range).
    pub fn get(&self, l: i64) -> f64 {
        let i = l - self.offset;
        if i < 0 || i >= self.taps.len() as i64 {
            0.0
        } else {
            self.taps[i as usize]
        }
    }

    pub fn indexed(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.taps
            .iter()
            .enumerate()
            .map(move |(i, &h)| (self.offset + i as i64, h))
    }

    /// Σ_l h_l e^{-iλl}.
    pub fn dtft(&self, lambda: f64) -> Complex64 {
        let step = Complex64::from_polar(1.0, -lambda);
        let mut z = Complex64::from_polar(1.0, -lambda * self.offset as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &h) in self.taps.iter().enumerate() {
            acc += z * h;
            z *= step;
            // re-anchor periodically to keep the recurrence accurate
            if i % 64 == 63 {
                z = Complex64::from_polar(1.0, -lambda * (self.offset + i as i64 + 1) as f64);
            }
        }
        acc
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|h| h * h).sum()
    }

    /// Σ_l h_l l^m.
    pub fn moment(&self, m: u32) -> f64 {
        self.indexed()
            .map(|(l, h)| h * (l as f64).powi(m as i32))
            .sum()
    }
}

/// Filters for scales 0..=j_max of a given wavelet.
#[derive(Debug, Clone)]
pub struct FilterBank {
    spec: WaveletSpec,
    filters: Vec<Filter>,
}

/// Computes h_{j,l} for every j ≤ `j_max`.
pub fn build_filters(spec: &WaveletSpec, j_max: usize) -> Result<FilterBank> {
    if j_max > 40 {
        return Err(LrdError::InvalidArgument(format!(
            "j_max = {j_max} is unreasonably large"
        )));
    }
    let rule = GaussLegendre::new(spec.order + 1);
    let filters = (0..=j_max)
        .into_par_iter()
        .map(|j| scale_filter(spec, &rule, j))
        .collect();
    Ok(FilterBank {
        spec: spec.clone(),
        filters,
    })
}

fn scale_filter(spec: &WaveletSpec, rule: &GaussLegendre, j: usize) -> Filter {
    let n = spec.order as i64;
    let two_j = 1i64 << j;
    let offset = -(2 * n * two_j + n);
    let len = (2 * n * two_j + n + 1) as usize;
    let norm = 2f64.powf(-(j as f64) / 2.0);
    let phi = spec.phi_pieces();
    let psi = spec.psi_pieces();
    let inv = 1.0 / two_j as f64;
    let mut taps = vec![0.0; len];
    for (i, tap) in taps.iter_mut().enumerate() {
        let l = offset + i as i64;
        // φ(t + l) lives on cells t ∈ [phi.start - l, phi.end - l)
        let mut acc = 0.0;
        for c in (phi.start() - l)..(phi.end() - l) {
            let Some(phi_poly) = phi.piece_at(c + l) else {
                continue;
            };
            // ψ(2^{-j} t) on [c, c+1] stays inside one unit cell of ψ
            let psi_cell = c.div_euclid(two_j);
            let Some(psi_poly) = psi.piece_at(psi_cell) else {
                continue;
            };
            let psi_origin = (psi_cell * two_j) as f64;
            acc += rule.integrate(c as f64, c as f64 + 1.0, |t| {
                horner(phi_poly, t - c as f64) * horner(psi_poly, (t - psi_origin) * inv)
            });
        }
        *tap = norm * acc;
    }
    Filter { offset, taps }
}

impl FilterBank {
    pub fn spec(&self) -> &WaveletSpec {
        &self.spec
    }

    pub fn j_max(&self) -> usize {
        self.filters.len() - 1
    }

    pub fn filter(&self, j: usize) -> Result<&Filter> {
        self.filters.get(j).ok_or(LrdError::ScaleOutOfRange {
            j,
            max: self.j_max(),
        })
    }

    pub fn filters(&self) -> &[Filter] {
        &self.filters
    }

    /// H_j(λ) = Σ_l h_{j,l} e^{-iλl}.
    pub fn transfer_fn(&self, j: usize, lambda: f64) -> Result<Complex64> {
        Ok(self.filter(j)?.dtft(lambda))
    }

    /// Taps of H̃_j with H_j(λ) = (1 - e^{iλ})^M H̃_j(λ), plus the largest
    /// division remainder encountered (zero for an exact factorization).
    pub fn tilde_filter(&self, j: usize) -> Result<(Filter, f64)> {
        let mut current = self.filter(j)?.clone();
        let mut worst = 0.0f64;
        for _ in 0..self.spec.vanishing_moments {
            let (next, rem) = divide_by_backward_difference(&current);
            worst = worst.max(rem.abs());
            current = next;
        }
        Ok((current, worst))
    }

    /// Writes `j,l,h` rows ordered by (j, l).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "j,l,h")?;
        for (j, f) in self.filters.iter().enumerate() {
            for (l, h) in f.indexed() {
                writeln!(out, "{j},{l},{h:.16e}")?;
            }
        }
        Ok(())
    }
}

// h = (δ_0 - δ_{-1}) ⋆ g  ⇔  h_l = g_l - g_{l+1}; returns (g, Σ h).
fn divide_by_backward_difference(h: &Filter) -> (Filter, f64) {
    let mut g = Vec::with_capacity(h.len().saturating_sub(1));
    let mut partial = 0.0;
    for &v in h.taps.iter().take(h.len().saturating_sub(1)) {
        partial += v;
        g.push(-partial);
    }
    let total = partial + h.taps.last().copied().unwrap_or(0.0);
    (
        Filter {
            offset: h.offset + 1,
            taps: g,
        },
        total,
    )
}
