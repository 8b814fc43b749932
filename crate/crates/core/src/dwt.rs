//! Wavelet coefficients of a finite sample, coefficient counts and the
//! empirical scalogram.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LrdError, Result};
use crate::filter_bank::FilterBank;

/// Observed values X_1, ..., X_n.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(LrdError::InvalidArgument("sample is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LrdError::InvalidArgument(format!(
                "sample value at position {} is not finite",
                i + 1
            )));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Parses one decimal per line, optionally preceded by an `x` header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut first = true;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if first && line == "x" {
                first = false;
                continue;
            }
            first = false;
            let v: f64 = line.parse().map_err(|_| {
                LrdError::Parse(format!("line {}: '{line}' is not a number", lineno + 1))
            })?;
            values.push(v);
        }
        Self::new(values)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x")?;
        for v in &self.values {
            writeln!(out, "{v:.16e}")?;
        }
        Ok(())
    }
}

/// n_j = max(0, ⌊2^{-j}(n - T + 1)⌋ - T + 1).
pub fn coeff_count(n: usize, t: usize, j: usize) -> usize {
    let span = n as i64 - t as i64 + 1;
    if span <= 0 || j >= 63 {
        return 0;
    }
    let v = (span >> j) - t as i64 + 1;
    v.max(0) as usize
}

/// Largest j with n_j > 0, found by scanning.
pub fn max_scale(n: usize, t: usize) -> Result<usize> {
    if n < t || coeff_count(n, t, 0) == 0 {
        return Err(LrdError::SampleTooShort {
            n,
            min: 2 * t - 1,
            t,
        });
    }
    let mut j = 0;
    while coeff_count(n, t, j + 1) > 0 {
        j += 1;
    }
    Ok(j)
}

/// Coefficients W_{j,k}, 0 ≤ k < n_j, for j = 0..=J.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    pub n: usize,
    pub support_len: usize,
    pub coefficients: Vec<Vec<f64>>,
}

impl WaveletPyramid {
    pub fn max_scale(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn count(&self, j: usize) -> usize {
        self.coefficients.get(j).map_or(0, Vec::len)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "j,k,w")?;
        for (j, row) in self.coefficients.iter().enumerate() {
            for (k, w) in row.iter().enumerate() {
                writeln!(out, "{j},{k},{w:.16e}")?;
            }
        }
        Ok(())
    }
}

/// W_{j,k} = Σ_l X_l h_{j, 2^j k - l} over the admissible index set.
pub fn transform(bank: &FilterBank, sample: &Sample) -> Result<WaveletPyramid> {
    transform_window(bank, sample.values(), 0, sample.len())
}

/// Same as [`transform`] but reads X_1..X_n from `buffer[start..start + n]`
/// without slicing, so out-of-window reads would be observable.
pub(crate) fn transform_window(
    bank: &FilterBank,
    buffer: &[f64],
    start: usize,
    n: usize,
) -> Result<WaveletPyramid> {
    let t = bank.spec().support_len;
    let big_j = max_scale(n, t)?;
    if bank.j_max() < big_j {
        return Err(LrdError::InvalidArgument(format!(
            "filter bank only reaches scale {} but the sample needs {big_j}",
            bank.j_max()
        )));
    }
    let coefficients = (0..=big_j)
        .into_par_iter()
        .map(|j| {
            let filter = bank.filter(j).expect("scale checked above");
            let nj = coeff_count(n, t, j);
            let stride = 1i64 << j;
            (0..nj)
                .map(|k| {
                    let base = stride * k as i64;
                    let mut acc = 0.0;
                    for (m, h) in filter.indexed() {
                        let l = base - m;
                        if h == 0.0 {
                            continue;
                        }
                        debug_assert!(l >= 1 && l <= n as i64, "index {l} outside 1..={n}");
                        acc += h * buffer[start + (l - 1) as usize];
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(WaveletPyramid {
        n,
        support_len: t,
        coefficients,
    })
}

/// Per-scale count and empirical second moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleStat {
    pub j: usize,
    pub n_j: usize,
    pub sigma2_hat: f64,
}

/// Empirical scalogram σ̂²_j for j = 0..=J.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scalogram {
    pub scales: Vec<ScaleStat>,
}

impl Scalogram {
    pub fn from_values(counts: Vec<usize>, sigma2: Vec<f64>) -> Result<Self> {
        if counts.len() != sigma2.len() || counts.is_empty() {
            return Err(LrdError::InvalidArgument(
                "counts and scalogram values must have equal, non-zero length".into(),
            ));
        }
        Ok(Self {
            scales: counts
                .into_iter()
                .zip(sigma2)
                .enumerate()
                .map(|(j, (n_j, sigma2_hat))| ScaleStat { j, n_j, sigma2_hat })
                .collect(),
        })
    }

    pub fn max_scale(&self) -> usize {
        self.scales.len() - 1
    }

    /// σ̂²_j, zero beyond the maximal scale.
    pub fn sigma2(&self, j: usize) -> f64 {
        self.scales.get(j).map_or(0.0, |s| s.sigma2_hat)
    }

    pub fn count(&self, j: usize) -> usize {
        self.scales.get(j).map_or(0, |s| s.n_j)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "j,n_j,sigma2_hat")?;
        for s in &self.scales {
            writeln!(out, "{},{},{:.16e}", s.j, s.n_j, s.sigma2_hat)?;
        }
        Ok(())
    }
}

/// σ̂²_j = n_j^{-1} Σ_k W_{j,k}² (no centering).
pub fn scalogram(pyramid: &WaveletPyramid) -> Scalogram {
    let scales = pyramid
        .coefficients
        .iter()
        .enumerate()
        .map(|(j, row)| {
            let n_j = row.len();
            let sigma2_hat = if n_j == 0 {
                0.0
            } else {
                row.iter().map(|w| w * w).sum::<f64>() / n_j as f64
            };
            ScaleStat { j, n_j, sigma2_hat }
        })
        .collect();
    Scalogram { scales }
}
