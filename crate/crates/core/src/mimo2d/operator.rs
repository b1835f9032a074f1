use rayon::prelude::*;

use super::block::BlockTransferSeries;
use super::field::VelocityField2D;
use crate::error::{Error, Result};
use crate::forward1d::StaggeredGrid;
use crate::linalg::{ChebyshevSeries, LinearOperator};
use crate::real::{dot, Real};

/// Largest number of unknowns accepted by [`Operator2D::new`].
pub const MAX_UNKNOWNS: usize = 4_000_000;

const CHEB_TOL: f64 = 1e-14;
const CHEB_MAX_DEGREE: usize = 1 << 14;

/// Symmetrized 5-point operator `M^{−1/2} S M^{−1/2}` for `−v²Δ`.
///
/// Neumann at `x = 0`, Dirichlet at `x = xmax` and `y = ±ymax`. In `x` the stencil is the
/// 1D staggered one; `M_p = h_y ∫ v⁻² dx` over the dual cell of node `p`. Unknown `p`
/// at `(x_j, y_i)` is stored at `p = (i − 1)·nx' + j` with `nx' = nx − 1`.
#[derive(Clone, Debug)]
pub struct Operator2D<T> {
    nxu: usize,
    nyu: usize,
    mass: Vec<T>,
    diag: Vec<T>,
    /// Coupling of `p` to `p + 1` (zero at the last column).
    cx: Vec<T>,
    /// Coupling of `p` to `p + nx'` (zero at the last row).
    cy: Vec<T>,
    bound: T,
    h_first: T,
    hy: T,
}

impl<T: Real> Operator2D<T> {
    pub fn new(field: &VelocityField2D<T>) -> Result<Self> {
        let (nxu, nyu) = (field.nx() - 1, field.ny() - 2);
        let size = nxu * nyu;
        if size > MAX_UNKNOWNS {
            return Err(Error::invalid(
                "grid",
                format!("{size} unknowns exceed the cap of {MAX_UNKNOWNS}; use a coarser field"),
            ));
        }
        let grid = StaggeredGrid::uniform(nxu, field.xmax())?;
        let (h, hy) = (grid.h(), field.hy());
        let steps = grid.dual_steps();
        let mut mass = Vec::with_capacity(size);
        for i in 1..=nyu {
            let row = field.row(i)?;
            mass.extend((0..nxu).map(|j| {
                let (a, b) = grid.dual_cell(j);
                hy * row.inv_sq_integral(a, b)
            }));
        }
        let kx = hy / h;
        let mut diag = vec![T::zero(); size];
        let mut cx = vec![T::zero(); size];
        let mut cy = vec![T::zero(); size];
        for i in 0..nyu {
            for j in 0..nxu {
                let p = i * nxu + j;
                let ky = steps[j] / hy;
                let left = if j > 0 { kx } else { T::zero() };
                diag[p] = (left + kx + ky + ky) / mass[p];
                if j + 1 < nxu {
                    cx[p] = kx / (mass[p] * mass[p + 1]).sqrt();
                }
                if i + 1 < nyu {
                    cy[p] = ky / (mass[p] * mass[p + nxu]).sqrt();
                }
            }
        }
        let bound = (0..size)
            .map(|p| {
                let mut r = diag[p] + cx[p] + cy[p];
                if p % nxu > 0 {
                    r += cx[p - 1];
                }
                if p >= nxu {
                    r += cy[p - nxu];
                }
                r
            })
            .fold(T::zero(), T::max);
        Ok(Operator2D {
            nxu,
            nyu,
            mass,
            diag,
            cx,
            cy,
            bound,
            h_first: steps[0],
            hy,
        })
    }

    pub fn columns(&self) -> usize {
        self.nxu
    }

    pub fn rows(&self) -> usize {
        self.nyu
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    /// `M^{1/2} δ` for a point source at `(0, y_i)`, field row `i ∈ [1, ny − 2]`.
    pub fn source_delta(&self, row: usize) -> Vec<T> {
        let p = (row - 1) * self.nxu;
        let mut d = vec![T::zero(); self.dim()];
        d[p] = self.mass[p].sqrt() / (self.h_first * self.hy);
        d
    }
}

impl<T: Real> LinearOperator<T> for Operator2D<T> {
    fn dim(&self) -> usize {
        self.nxu * self.nyu
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let n = self.nxu;
        for p in 0..x.len() {
            let mut s = self.diag[p] * x[p];
            if p % n + 1 < n {
                s -= self.cx[p] * x[p + 1];
            }
            if p % n > 0 {
                s -= self.cx[p - 1] * x[p - 1];
            }
            if p + n < x.len() {
                s -= self.cy[p] * x[p + n];
            }
            if p >= n {
                s -= self.cy[p - n] * x[p - n];
            }
            y[p] = s;
        }
    }

    fn spectral_bound(&self) -> T {
        self.bound
    }
}

/// Field row of the interior node nearest to each source position.
pub fn snap_sources<T: Real>(field: &VelocityField2D<T>, sources: &[T]) -> Result<Vec<usize>> {
    if sources.is_empty() {
        return Err(Error::invalid("sources", "need at least one source"));
    }
    let hy = field.hy();
    let mut rows: Vec<usize> = Vec::with_capacity(sources.len());
    for &y in sources {
        let r = ((y + field.ymax()) / hy).round();
        let row = r.to_usize().unwrap_or(0);
        if !(y.abs() < field.ymax()) || row == 0 || row >= field.ny() - 1 {
            return Err(Error::invalid(
                "sources",
                format!("source at y = {} lies outside the open source line", y.to_f64_lossy()),
            ));
        }
        if rows.contains(&row) {
            return Err(Error::invalid(
                "sources",
                format!("two sources snap to the same grid row near y = {}", y.to_f64_lossy()),
            ));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Snapshots `ũ_k = cos(kτ√Ã) b̃`, `k < count`, in the symmetrized variables, for one source.
pub fn propagate2d<T: Real>(
    op: &Operator2D<T>,
    source: &[T],
    propagator: &ChebyshevSeries<T>,
    count: usize,
) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(count);
    out.push(source.to_vec());
    if count > 1 {
        out.push(propagator.apply(op, source));
    }
    for k in 2..count {
        let pu = propagator.apply(op, &out[k - 1]);
        let next = pu.iter().zip(&out[k - 2]).map(|(&a, &b)| a + a - b).collect();
        out.push(next);
    }
    out
}

/// `b̃ = v(0)·exp(−σ²Ã/4) M^{1/2}δ` for each source row.
pub fn sources2d<T: Real>(op: &Operator2D<T>, v0: T, rows: &[usize], sigma: T) -> Result<Vec<Vec<T>>> {
    let s2 = sigma * sigma * T::lit(0.25);
    let smooth = ChebyshevSeries::fit(|l| (-s2 * l).exp(), T::zero(), op.spectral_bound(), T::lit(CHEB_TOL), CHEB_MAX_DEGREE)?;
    Ok(rows
        .par_iter()
        .map(|&r| smooth.apply(op, &op.source_delta(r)).into_iter().map(|x| v0 * x).collect())
        .collect())
}

/// `cos(τ√λ)` on the operator's spectral interval.
pub fn propagator2d<T: Real>(op: &Operator2D<T>, tau: T) -> Result<ChebyshevSeries<T>> {
    ChebyshevSeries::fit(|l| (tau * l.sqrt()).cos(), T::zero(), op.spectral_bound(), T::lit(CHEB_TOL), CHEB_MAX_DEGREE)
}

/// Sources, their snapshots and the operator for a 2D simulation.
#[derive(Clone, Debug)]
pub struct Simulation2D<T> {
    pub op: Operator2D<T>,
    pub rows: Vec<usize>,
    pub sources: Vec<Vec<T>>,
    /// `snapshots[a][k]` for source `a`.
    pub snapshots: Vec<Vec<Vec<T>>>,
}

/// Rejects windows long enough for the echo from the side walls `y = ±ymax` to reach a source.
pub fn check_lateral_window<T: Real>(field: &VelocityField2D<T>, sources: &[T], tau: T, count: usize) -> Result<()> {
    let outer = sources.iter().fold(T::zero(), |m, &y| m.max(y.abs()));
    let echo = T::lit(2.0) * (field.ymax() - outer) / field.max_speed();
    let window = T::count(count.saturating_sub(1)) * tau;
    if window > echo {
        return Err(Error::invalid(
            "ymax",
            format!(
                "side-wall echo returns after {:.4} but the window (2n-1)*tau is {:.4}; widen ymax \
                 (default {} x the source aperture) or reduce n or tau",
                echo.to_f64_lossy(),
                window.to_f64_lossy(),
                super::field::YMAX_PER_APERTURE
            ),
        ));
    }
    Ok(())
}

pub fn simulate2d<T: Real>(field: &VelocityField2D<T>, sources: &[T], sigma: T, tau: T, count: usize) -> Result<Simulation2D<T>> {
    if !(sigma > T::zero() && tau > T::zero()) {
        return Err(Error::invalid("sigma/tau", "must be positive"));
    }
    check_lateral_window(field, sources, tau, count)?;
    let v0 = field.source_line_speed()?;
    let rows = snap_sources(field, sources)?;
    let op = Operator2D::new(field)?;
    let b = sources2d(&op, v0, &rows, sigma)?;
    let prop = propagator2d(&op, tau)?;
    let snapshots = b.par_iter().map(|s| propagate2d(&op, s, &prop, count)).collect();
    Ok(Simulation2D {
        op,
        rows,
        sources: b,
        snapshots,
    })
}

/// Block samples `F_k^{ab} = ⟨b^a, u_k^b⟩`, `k < count`, for sources at the given `y`.
pub fn forward2d<T: Real>(
    field: &VelocityField2D<T>,
    sources: &[T],
    sigma: T,
    tau: T,
    count: usize,
) -> Result<BlockTransferSeries<T>> {
    let sim = simulate2d(field, sources, sigma, tau, count)?;
    block_series_from(&sim, field, sigma, tau)
}

pub fn block_series_from<T: Real>(
    sim: &Simulation2D<T>,
    field: &VelocityField2D<T>,
    sigma: T,
    tau: T,
) -> Result<BlockTransferSeries<T>> {
    let m = sim.sources.len();
    let count = sim.snapshots[0].len();
    let blocks = (0..count)
        .map(|k| {
            let mut f = Vec::with_capacity(m * m);
            for a in 0..m {
                for b in 0..m {
                    f.push(dot(&sim.sources[a], &sim.snapshots[b][k]));
                }
            }
            f
        })
        .collect();
    let ys = sim.rows.iter().map(|&r| field.y(r)).collect();
    BlockTransferSeries::new(tau, sigma, ys, blocks)
}
