use rayon::prelude::*;

use super::{StaggeredGrid, VelocityModel};
use crate::error::{Error, Result};
use crate::linalg::{EigDecomposition, SymTridiagonal};
use crate::real::{weighted_dot, Real};

/// Staggered-grid discretization of `A = −v² d²/dx²` with a Neumann end at 0 and a
/// Dirichlet end at `xmax`.
///
/// `A = W⁻¹ Gᵀ K G`, where `(G u)_j = u_{j+1} − u_j` (with `u_m = 0`), `K = 1/h` on
/// the dual cells and `W_j = ∫ v⁻²` over the dual cell around primary node `j`.
/// `A` is self-adjoint in `⟨f, g⟩_W = Σ W_j f_j g_j`; the dual-side inner product
/// is `Σ h f_j g_j`. The symmetrized form `W^{1/2} A W^{−1/2}` is eigendecomposed once
/// and every matrix function goes through those modes.
#[derive(Clone, Debug)]
pub struct DiscreteOperator<T> {
    grid: StaggeredGrid<T>,
    weights: Vec<T>,
    sqrt_w: Vec<T>,
    origin_speed: T,
    sym: SymTridiagonal<T>,
    eig: EigDecomposition<T>,
}

impl<T: Real> DiscreteOperator<T> {
    pub fn discretize(grid: &StaggeredGrid<T>, model: &VelocityModel<T>) -> Result<Self> {
        let m = grid.len();
        let weights: Vec<T> = (0..m)
            .map(|j| {
                let (a, b) = grid.dual_cell(j);
                model.inv_sq_integral(a, b)
            })
            .collect();
        if let Some(j) = weights.iter().position(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(Error::invalid("velocity", format!("non-positive cell weight at node {j}")));
        }
        let k = T::one() / grid.h();
        let sqrt_w: Vec<T> = weights.iter().map(|w| w.sqrt()).collect();
        let diag = (0..m)
            .map(|j| if j == 0 { k } else { k + k } / weights[j])
            .collect();
        let off = (0..m - 1).map(|j| -k / (sqrt_w[j] * sqrt_w[j + 1])).collect();
        let sym = SymTridiagonal::new(diag, off)?;
        let eig = sym.eig()?;
        if let Some(&l) = eig.values.first() {
            if !(l > T::zero()) {
                return Err(Error::breakdown("operator spectrum", 0, format!("smallest eigenvalue {l:e} is not positive")));
            }
        }
        Ok(DiscreteOperator {
            grid: grid.clone(),
            weights,
            sqrt_w,
            origin_speed: model.origin_speed(),
            sym,
            eig,
        })
    }

    pub fn grid(&self) -> &StaggeredGrid<T> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Primary inner-product weights `W_j`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Dual inner-product weights (the primary step `h`).
    pub fn dual_weights(&self) -> Vec<T> {
        vec![self.grid.h(); self.len()]
    }

    pub fn origin_speed(&self) -> T {
        self.origin_speed
    }

    /// Speed `ṽ_j` with `ĥ_j/ṽ_j² = W_j`: the cell's root-mean-square harmonic average.
    pub fn effective_speeds(&self) -> Vec<T> {
        self.grid
            .dual_steps()
            .iter()
            .zip(&self.weights)
            .map(|(&h, &w)| (h / w).sqrt())
            .collect()
    }

    pub fn symmetrized(&self) -> &SymTridiagonal<T> {
        &self.sym
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eig.values
    }

    pub fn inner(&self, a: &[T], b: &[T]) -> T {
        weighted_dot(a, b, &self.weights)
    }

    pub fn dual_inner(&self, a: &[T], b: &[T]) -> T {
        crate::real::dot(a, b) * self.grid.h()
    }

    /// `K G u`: primary values to dual fluxes.
    pub fn flux(&self, u: &[T]) -> Vec<T> {
        let m = self.len();
        let k = T::one() / self.grid.h();
        (0..m)
            .map(|j| {
                let next = if j + 1 < m { u[j + 1] } else { T::zero() };
                (next - u[j]) * k
            })
            .collect()
    }

    /// `W⁻¹ Gᵀ w`: dual values back to the primary grid, so `A = flux_adjoint ∘ flux`.
    pub fn flux_adjoint(&self, w: &[T]) -> Vec<T> {
        (0..self.len())
            .map(|j| {
                let prev = if j > 0 { w[j - 1] } else { T::zero() };
                (prev - w[j]) / self.weights[j]
            })
            .collect()
    }

    /// `A x` by the three-point stencil.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        self.flux_adjoint(&self.flux(x))
    }

    /// Discrete right-half delta `e_1/ĥ_1`.
    pub fn delta(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.len()];
        d[0] = T::one() / self.grid.dual_steps()[0];
        d
    }

    /// Modal coefficients `Zᵀ W^{1/2} x`.
    pub fn to_modal(&self, x: &[T]) -> Vec<T> {
        let m = self.len();
        let mut c = vec![T::zero(); m];
        for r in 0..m {
            let s = x[r] * self.sqrt_w[r];
            if s != T::zero() {
                crate::real::axpy(s, self.eig.vectors.row(r), &mut c);
            }
        }
        c
    }

    /// Inverse of [`to_modal`](Self::to_modal): `W^{−1/2} Z c`.
    pub fn from_modal(&self, c: &[T]) -> Vec<T> {
        (0..self.len())
            .into_par_iter()
            .map(|r| crate::real::dot(self.eig.vectors.row(r), c) / self.sqrt_w[r])
            .collect()
    }

    /// `f(A) x`.
    pub fn apply_fn(&self, f: impl Fn(T) -> T, x: &[T]) -> Vec<T> {
        let mut c = self.to_modal(x);
        for (ci, &l) in c.iter_mut().zip(&self.eig.values) {
            *ci *= f(l);
        }
        self.from_modal(&c)
    }
}
