//! Data-driven reduced-order models for acoustic velocity estimation.
//!
//! From samples `f_k` of a transfer function at uniform times `kτ`, the crate builds a
//! Jacobi-matrix reduced-order model, extracts its continued-fraction coefficients
//! `γ̂_j, γ_j`, and turns their ratios against a reference medium into pointwise speed
//! estimates on an optimal grid. The 2D module does the same with matrix-valued data.
//!
//! All numerics are generic over [`Real`]; the aliases below fix the scalar to `f64`.

// `!(x > 0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod forward1d;
pub mod gammas;
pub mod invert1d;
pub mod io;
pub mod linalg;
pub mod mimo2d;
pub mod models;
pub mod romdata;
mod real;

pub use error::{Error, Result};
pub use real::Real;

pub type VelocityModel64 = forward1d::VelocityModel<f64>;
pub type DiscreteOperator64 = forward1d::DiscreteOperator<f64>;
pub type TransferSeries64 = forward1d::TransferSeries<f64>;
pub type GramPair64 = romdata::GramPair<f64>;
pub type SpectralMeasure64 = romdata::SpectralMeasure<f64>;
pub type JacobiRom64 = romdata::JacobiRom<f64>;
pub type GammaSet64 = gammas::GammaSet<f64>;
pub type InversionResult64 = invert1d::InversionResult<f64>;
pub type VelocityField2D64 = mimo2d::VelocityField2D<f64>;
pub type BlockTransferSeries64 = mimo2d::BlockTransferSeries<f64>;
pub type Inversion2D64 = mimo2d::Inversion2D<f64>;
