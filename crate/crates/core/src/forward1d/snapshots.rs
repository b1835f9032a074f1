use rayon::prelude::*;

use super::{DiscreteOperator, VelocityModel};
use crate::error::{Error, Result};
use crate::real::Real;

/// Primary snapshots `u_k = cos(kτ√A) b` and dual snapshots `w_k` at the half steps.
#[derive(Clone, Debug)]
pub struct SnapshotSet<T> {
    pub tau: T,
    pub primary: Vec<Vec<T>>,
    pub dual: Vec<Vec<T>>,
}

impl<T: Real> SnapshotSet<T> {
    pub fn len(&self) -> usize {
        self.primary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primary.is_empty()
    }
}

/// Measured samples `f_k = ⟨b, u_k⟩`, `k = 0..2n−1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferSeries<T> {
    tau: T,
    sigma: T,
    values: Vec<T>,
}

impl<T: Real> TransferSeries<T> {
    pub fn new(tau: T, sigma: T, values: Vec<T>) -> Result<Self> {
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(Error::invalid("tau", "time step must be positive"));
        }
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::invalid("sigma", "wavelet width must be positive"));
        }
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(Error::invalid(
                "transfer series",
                format!("need an even, nonzero number of samples (2n), got {}", values.len()),
            ));
        }
        if !(values[0] > T::zero()) {
            return Err(Error::invalid("transfer series", "f_0 must be positive"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("transfer series", "non-finite sample"));
        }
        Ok(TransferSeries { tau, sigma, values })
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Number of snapshots `n` (half the sample count).
    pub fn n(&self) -> usize {
        self.values.len() / 2
    }

    /// Total mass `c = f_0`.
    pub fn mass(&self) -> T {
        self.values[0]
    }

    /// `f_{|k|}`, extending the series evenly to negative indices.
    pub fn at(&self, k: isize) -> T {
        self.values[k.unsigned_abs()]
    }

    /// The first `2n'` samples.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || 2 * n > self.values.len() {
            return Err(Error::invalid("n", format!("cannot take {n} snapshots from {} samples", self.values.len())));
        }
        Self::new(self.tau, self.sigma, self.values[..2 * n].to_vec())
    }
}

/// `s(λ) = sin(τ√λ/2)/√λ`, continuous at 0.
pub fn half_sine<T: Real>(tau: T, lambda: T) -> T {
    let r = lambda.max(T::zero()).sqrt();
    if r == T::zero() {
        tau * T::lit(0.5)
    } else {
        (tau * r * T::lit(0.5)).sin() / r
    }
}

/// Smoothed source `b = v(0)·exp(−σ²A/4)·δ_h`.
pub fn source_vector<T: Real>(op: &DiscreteOperator<T>, sigma: T) -> Result<Vec<T>> {
    if !(sigma > T::zero()) {
        return Err(Error::invalid("sigma", "wavelet width must be positive"));
    }
    let q = sigma * sigma / T::lit(4.0);
    let v0 = op.origin_speed();
    Ok(op.apply_fn(|l| v0 * (-q * l).exp(), &op.delta()))
}

/// `count` primary and dual snapshots, computed exactly from the operator's modes.
pub fn propagate_snapshots<T: Real>(op: &DiscreteOperator<T>, b: &[T], tau: T, count: usize) -> Result<SnapshotSet<T>> {
    if !(tau > T::zero()) {
        return Err(Error::invalid("tau", "time step must be positive"));
    }
    let c = op.to_modal(b);
    let lam = op.eigenvalues();
    let half = T::lit(0.5);
    let primary = (0..count)
        .into_par_iter()
        .map(|k| {
            if k == 0 {
                return b.to_vec();
            }
            let kt = T::count(k) * tau;
            let ck: Vec<T> = c.iter().zip(lam).map(|(&ci, &l)| ci * (kt * l.sqrt()).cos()).collect();
            op.from_modal(&ck)
        })
        .collect();
    let dual = (0..count)
        .into_par_iter()
        .map(|k| {
            let kt = (T::count(k) + half) * tau;
            let ck: Vec<T> = c
                .iter()
                .zip(lam)
                .map(|(&ci, &l)| {
                    let r = l.sqrt();
                    ci * (kt * r).sin() / r
                })
                .collect();
            op.flux(&op.from_modal(&ck))
        })
        .collect();
    Ok(SnapshotSet { tau, primary, dual })
}

/// `f_k = ⟨b, u_k⟩_W` from explicit snapshots.
pub fn measure_transfer<T: Real>(snapshots: &SnapshotSet<T>, b: &[T], weights: &[T], sigma: T) -> Result<TransferSeries<T>> {
    let values = snapshots
        .primary
        .iter()
        .map(|u| crate::real::weighted_dot(b, u, weights))
        .collect();
    TransferSeries::new(snapshots.tau, sigma, values)
}

/// `f_k` directly in modal coordinates, `Σ_l c_l² cos(kτ√λ_l)`, without forming snapshots.
pub fn synthesize<T: Real>(op: &DiscreteOperator<T>, sigma: T, tau: T, count: usize) -> Result<TransferSeries<T>> {
    let b = source_vector(op, sigma)?;
    let c = op.to_modal(&b);
    let lam = op.eigenvalues();
    let values = (0..count)
        .map(|k| {
            let kt = T::count(k) * tau;
            c.iter().zip(lam).map(|(&ci, &l)| ci * ci * (kt * l.sqrt()).cos()).sum()
        })
        .collect();
    TransferSeries::new(tau, sigma, values)
}

/// Rejects sampling windows long enough for the echo from the far wall to return.
pub fn check_no_return<T: Real>(model: &VelocityModel<T>, tau: T, count: usize) -> Result<()> {
    let window = T::count(count.saturating_sub(1)) * tau;
    let round_trip = T::lit(2.0) * model.total_traveltime();
    if window > round_trip {
        return Err(Error::invalid(
            "n",
            format!(
                "sampling window (2n-1)*tau = {:.4} exceeds the round-trip traveltime {:.4} to xmax; \
                 reduce n or tau, or extend the domain",
                window.to_f64_lossy(),
                round_trip.to_f64_lossy()
            ),
        ));
    }
    Ok(())
}
