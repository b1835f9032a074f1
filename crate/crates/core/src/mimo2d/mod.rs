//! Square multi-input/multi-output extension to two dimensions.
//!
//! Sources and receivers are collocated on the line `x = 0`. The forward solver is a
//! 5-point staggered scheme propagated with Chebyshev series; everything downstream is
//! the matrix-valued analog of the 1D pipeline.

mod block;
mod field;
mod invert;
mod operator;

pub use block::{
    block_data_mismatch, block_gammas, block_gram, block_lanczos, block_measure, BlockGammaSet, BlockGramPair,
    BlockMeasure, BlockRom, BlockTransferSeries, RANK_TOL, SYMMETRY_TOL,
};
pub use field::{
    builtin_2d, default_ymax, VelocityField2D, BUILTIN_2D, DEFAULT_APERTURE, DEFAULT_NX, DEFAULT_NY, DEFAULT_XMAX,
    YMAX_PER_APERTURE,
};
pub use invert::{invert2d, Inversion2D, Invert2dConfig, RayLine};
pub use operator::{
    block_series_from, check_lateral_window, forward2d, propagate2d, propagator2d, simulate2d, snap_sources, sources2d, Operator2D,
    Simulation2D, MAX_UNKNOWNS,
};

/// `m` sources evenly spaced on `[−aperture/2, aperture/2]`.
pub fn source_array<T: crate::Real>(m: usize, aperture: T) -> Vec<T> {
    if m == 1 {
        return vec![T::zero()];
    }
    let step = aperture / T::count(m - 1);
    (0..m).map(|i| -aperture * T::lit(0.5) + T::count(i) * step).collect()
}
