//! One-dimensional forward modeling on a staggered grid.
//!
//! The operator is eigendecomposed once, so snapshots `cos(kτ√A) b` and the
//! measured series are exact in time for any `τ`.

mod grid;
mod model;
mod operator;
mod snapshots;

pub use grid::{StaggeredGrid, MIN_NODES};
pub use model::{Role, VelocityModel};
pub use operator::DiscreteOperator;
pub use snapshots::{
    check_no_return, half_sine, measure_transfer, propagate_snapshots, source_vector, synthesize, SnapshotSet,
    TransferSeries,
};

use crate::error::Result;
use crate::real::Real;

/// Default solver grid size for `xmax = 1`.
pub const DEFAULT_NODES: usize = 2000;

/// Uniform grid on the model's domain plus its discretized operator.
pub fn discretize<T: Real>(model: &VelocityModel<T>, m: usize) -> Result<DiscreteOperator<T>> {
    let grid = StaggeredGrid::uniform(m, model.xmax())?;
    DiscreteOperator::discretize(&grid, model)
}

#[cfg(test)]
mod tests;
