// `!(x < y)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bspline;
pub mod cli;
pub mod dwt;
pub mod error;
pub mod estimators;
pub mod filter_bank;
pub mod mc;
pub mod quad;
pub mod simulate;
pub mod spectral;
pub mod wavelet_family;
