use crate::error::{Error, Result};
use crate::real::Real;

/// Uniform staggered grid on `[0, xmax]`.
///
/// Primary node `j` (0-based) sits at `j·h`; the implicit node `m` at `xmax` carries
/// the Dirichlet condition. Dual node `j` sits at `(j + ½)·h`. The dual cell around
/// primary node 0 is `[0, h/2]`, so its step is `h/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct StaggeredGrid<T> {
    m: usize,
    xmax: T,
    h: T,
    primary: Vec<T>,
    dual: Vec<T>,
}

pub const MIN_NODES: usize = 4;

impl<T: Real> StaggeredGrid<T> {
    pub fn uniform(m: usize, xmax: T) -> Result<Self> {
        if m < MIN_NODES {
            return Err(Error::invalid("m", format!("need at least {MIN_NODES} grid nodes, got {m}")));
        }
        if !(xmax > T::zero()) || !xmax.is_finite() {
            return Err(Error::invalid("xmax", "must be positive and finite"));
        }
        let h = xmax / T::count(m);
        let half = T::lit(0.5);
        Ok(StaggeredGrid {
            m,
            xmax,
            h,
            primary: (0..m).map(|j| T::count(j) * h).collect(),
            dual: (0..m).map(|j| (T::count(j) + half) * h).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn xmax(&self) -> T {
        self.xmax
    }

    /// Primary step `h̃_j`, identical for every cell.
    pub fn h(&self) -> T {
        self.h
    }

    pub fn primary_nodes(&self) -> &[T] {
        &self.primary
    }

    pub fn dual_nodes(&self) -> &[T] {
        &self.dual
    }

    /// Distances between consecutive primary nodes (the last one reaches `xmax`).
    pub fn primary_steps(&self) -> Vec<T> {
        vec![self.h; self.m]
    }

    /// Dual cell lengths `ĥ_j`: `h/2` for the first cell, `h` afterwards.
    pub fn dual_steps(&self) -> Vec<T> {
        let mut s = vec![self.h; self.m];
        s[0] = self.h * T::lit(0.5);
        s
    }

    /// Dual cell `[x̂_{j−1}, x̂_j]` around primary node `j`, clipped at 0.
    pub fn dual_cell(&self, j: usize) -> (T, T) {
        let lo = if j == 0 { T::zero() } else { self.dual[j - 1] };
        (lo, self.dual[j])
    }
}
