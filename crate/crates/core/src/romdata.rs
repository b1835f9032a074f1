//! Data-driven reduced-order model.
//!
//! From `2n` samples `f_k` alone: the snapshot Gram matrices, the discrete spectral
//! measure `(θ_j, y_j²)` matching the Chebyshev moments, and the Jacobi matrix `P_n`
//! obtained either by Lanczos on that measure or by Cholesky orthogonalization.

use crate::error::{Error, Result};
use crate::forward1d::{DiscreteOperator, SnapshotSet, TransferSeries};
use crate::linalg::{cholesky, condition_number, sym_eig_named, JacobiMatrix, Matrix, SymMatrix};
use crate::real::Real;

/// Smallest Gram eigenvalue allowed, relative to the largest.
pub const PD_TOLERANCE: f64 = 1e-13;
/// Minimum spacing between quadrature nodes.
pub const NODE_GAP: f64 = 1e-12;

/// `U*U` and `U*PU` assembled from the data.
#[derive(Clone, Debug)]
pub struct GramPair<T> {
    pub uu: SymMatrix<T>,
    pub upu: SymMatrix<T>,
    pub cond_uu: T,
}

impl<T: Real> GramPair<T> {
    pub fn order(&self) -> usize {
        self.uu.order()
    }
}

/// `(U*U)_{jk} = ½(f_{j+k} + f_{|j−k|})` and the four-term analog for `U*PU`.
pub fn assemble_gram<T: Real>(f: &TransferSeries<T>) -> Result<GramPair<T>> {
    let n = f.n();
    let at = |i: isize| f.at(i);
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let uu = SymMatrix::from_fn(n, |j, k| {
        let (j, k) = (j as isize, k as isize);
        half * (at(j + k) + at(j - k))
    })?;
    let upu = SymMatrix::from_fn(n, |j, k| {
        let (j, k) = (j as isize, k as isize);
        quarter * (at(j + k + 1) + at(j + k - 1) + at(j - k + 1) + at(j - k - 1))
    })?;
    let eig = sym_eig_named(&uu, "snapshot Gram matrix U*U")?;
    let top = *eig.values.last().expect("order >= 1");
    let bottom = eig.values[0];
    let cond = if bottom > T::zero() { top / bottom } else { T::infinity() };
    if !(bottom > T::lit(PD_TOLERANCE) * top) {
        return Err(Error::IllConditioned { cond: cond.to_f64_lossy() });
    }
    Ok(GramPair { uu, upu, cond_uu: cond })
}

/// Discrete measure `Σ y_j² δ(θ − θ_j)` with Chebyshev moments `f_k`.
#[derive(Clone, Debug)]
pub struct SpectralMeasure<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub mass: T,
}

impl<T: Real> SpectralMeasure<T> {
    pub fn new(nodes: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::invalid("spectral measure", "need matching, nonempty nodes and weights"));
        }
        let mass = weights.iter().copied().sum();
        let meas = SpectralMeasure { nodes, weights, mass };
        meas.validate(T::nan())?;
        Ok(meas)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `y_j = √(y_j²)`.
    pub fn amplitudes(&self) -> Vec<T> {
        self.weights.iter().map(|w| w.sqrt()).collect()
    }

    /// `Σ y_j² T_k(θ_j)` for `k < count`.
    pub fn moments(&self, count: usize) -> Vec<T> {
        let mut prev: Vec<T> = vec![T::one(); self.len()];
        let mut cur: Vec<T> = self.nodes.clone();
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let tk = if k == 0 { &prev } else { &cur };
            out.push(tk.iter().zip(&self.weights).map(|(&t, &w)| t * w).sum());
            if k >= 1 {
                let next: Vec<T> = cur
                    .iter()
                    .zip(&prev)
                    .zip(&self.nodes)
                    .map(|((&c, &p), &x)| (x + x) * c - p)
                    .collect();
                prev = std::mem::replace(&mut cur, next);
            }
        }
        out
    }

    /// Ascending, separated nodes inside `(−1, 1)` with positive weights.
    fn validate(&self, cond: T) -> Result<()> {
        for (j, (&t, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            if !(t > -T::one() && t < T::one()) {
                return Err(Error::breakdown(
                    "spectral measure",
                    j,
                    format!("node {:e} lies outside (-1, 1)", t.to_f64_lossy()),
                ));
            }
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::breakdown(
                    "spectral measure",
                    j,
                    format!("weight {:e} is not positive; the data do not support {} nodes", w.to_f64_lossy(), self.len()),
                ));
            }
        }
        for j in 1..self.len() {
            let gap = self.nodes[j] - self.nodes[j - 1];
            if !(gap > T::lit(NODE_GAP)) {
                return Err(Error::NodeCollision {
                    i: j - 1,
                    j,
                    gap: gap.to_f64_lossy(),
                    cond: cond.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }
}

/// Nodes are the eigenvalues of `L⁻¹ (U*PU) L⁻ᵀ` with `U*U = LLᵀ`; weights come from
/// the first row of its eigenvectors scaled by `L_11 = √f_0`.
pub fn spectral_measure<T: Real>(g: &GramPair<T>) -> Result<SpectralMeasure<T>> {
    let ch = cholesky(&g.uu)?;
    let h = ch.congruence(&g.upu)?;
    let eig = sym_eig_named(&h, "pencil (U*PU, U*U)")?;
    let l11 = ch.factor()[(0, 0)];
    let weights = (0..h.order())
        .map(|j| {
            let y = l11 * eig.vectors[(0, j)];
            y * y
        })
        .collect::<Vec<T>>();
    let mass = g.uu.get(0, 0);
    let meas = SpectralMeasure {
        nodes: eig.values,
        weights,
        mass,
    };
    meas.validate(g.cond_uu)?;
    Ok(meas)
}

/// Jacobi matrix `P_n` together with the data mass `c` (so `b_n = √c e_1`).
#[derive(Clone, Debug)]
pub struct JacobiRom<T> {
    pub jacobi: JacobiMatrix<T>,
    pub mass: T,
}

impl<T: Real> JacobiRom<T> {
    pub fn order(&self) -> usize {
        self.jacobi.order()
    }

    pub fn bn_scale(&self) -> T {
        self.mass.sqrt()
    }

    /// The ROM's transfer samples `c e_1ᵀ T_k(P_n) e_1`, `k < count`.
    pub fn transfer(&self, count: usize) -> Vec<T> {
        rom_transfer(self, count)
    }
}

/// Lanczos on the discrete measure with full reorthogonalization.
pub fn lanczos_jacobi<T: Real>(meas: &SpectralMeasure<T>) -> Result<JacobiRom<T>> {
    let n = meas.len();
    let c = meas.mass;
    let scale = c.sqrt();
    let first: Vec<T> = meas.amplitudes().iter().map(|&y| y / scale).collect();
    let mut basis: Vec<Vec<T>> = vec![first];
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n.saturating_sub(1));
    let tol = T::lit(1e-13);
    for j in 0..n {
        let q = &basis[j];
        let mut r: Vec<T> = q.iter().zip(&meas.nodes).map(|(&v, &t)| v * t).collect();
        let a = crate::real::dot(q, &r);
        alpha.push(a);
        if j + 1 == n {
            break;
        }
        for _ in 0..2 {
            for prev in &basis {
                let p = crate::real::dot(prev, &r);
                crate::real::axpy(-p, prev, &mut r);
            }
        }
        let b = crate::real::norm2(&r);
        if !(b > tol) {
            return Err(Error::breakdown(
                "Lanczos",
                j + 1,
                format!(
                    "beta = {:e}; the measure supports only {} distinct nodes (duplicated nodes?)",
                    b.to_f64_lossy(),
                    j + 1
                ),
            ));
        }
        beta.push(b);
        basis.push(r.into_iter().map(|v| v / b).collect());
    }
    Ok(JacobiRom {
        jacobi: JacobiMatrix::new(alpha, beta)?,
        mass: c,
    })
}

/// Flips signs so every off-diagonal entry is nonnegative: `D M D` with `D = diag(±1)`.
pub fn fix_signs<T: Real>(m: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let n = m.order();
    let mut s = vec![T::one(); n];
    for j in 1..n {
        let e = m.get(j - 1, j);
        s[j] = if e < T::zero() { -s[j - 1] } else { s[j - 1] };
    }
    SymMatrix::from_fn(n, |i, j| s[i] * m.get(i, j) * s[j])
}

fn jacobi_from_dense<T: Real>(p: &SymMatrix<T>, mass: T) -> Result<JacobiRom<T>> {
    let n = p.order();
    let alpha = (0..n).map(|j| p.get(j, j)).collect();
    let beta = (1..n).map(|j| p.get(j - 1, j)).collect();
    Ok(JacobiRom {
        jacobi: JacobiMatrix::new(alpha, beta)?,
        mass,
    })
}

/// Dense `L⁻¹ (U*PU) L⁻ᵀ` with the sign convention of [`fix_signs`]; tridiagonal up to rounding.
pub fn cholesky_projection<T: Real>(g: &GramPair<T>) -> Result<SymMatrix<T>> {
    let ch = cholesky(&g.uu)?;
    fix_signs(&ch.congruence(&g.upu)?)
}

/// `P_n` by Cholesky orthogonalization of the data Gram matrix.
pub fn cholesky_rom<T: Real>(g: &GramPair<T>) -> Result<JacobiRom<T>> {
    jacobi_from_dense(&cholesky_projection(g)?, g.uu.get(0, 0))
}

/// `c e_1ᵀ T_k(P_n) e_1` by the vector Chebyshev recursion.
pub fn rom_transfer<T: Real>(rom: &JacobiRom<T>, count: usize) -> Vec<T> {
    let n = rom.order();
    let mut prev = vec![T::zero(); n];
    prev[0] = T::one();
    let mut cur = rom.jacobi.matvec(&prev);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        match k {
            0 => out.push(rom.mass * prev[0]),
            _ => {
                out.push(rom.mass * cur[0]);
                let pc = rom.jacobi.matvec(&cur);
                let next: Vec<T> = pc.iter().zip(&prev).map(|(&a, &b)| a + a - b).collect();
                prev = std::mem::replace(&mut cur, next);
            }
        }
    }
    out
}

/// `V*PV` for the `W`-orthonormal basis obtained by Gram–Schmidt on `u_0..u_{n−1}`,
/// with `P = cos(τ√A)` applied through the operator's modes. Needs the medium.
pub fn project_snapshots<T: Real>(op: &DiscreteOperator<T>, snaps: &SnapshotSet<T>, n: usize) -> Result<SymMatrix<T>> {
    let basis = gram_schmidt(op, &snaps.primary[..n])?;
    let tau = snaps.tau;
    let pv: Vec<Vec<T>> = basis
        .iter()
        .map(|v| op.apply_fn(|l| (tau * l.sqrt()).cos(), v))
        .collect();
    let dense = SymMatrix::symmetrize(&Matrix::from_fn(n, n, |i, j| op.inner(&basis[i], &pv[j])))?;
    fix_signs(&dense)
}

/// Classical Gram–Schmidt with one reorthogonalization pass in the `W` inner product.
pub fn gram_schmidt<T: Real>(op: &DiscreteOperator<T>, vectors: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        let mut r = v.clone();
        for _ in 0..2 {
            let coeffs: Vec<T> = basis.iter().map(|q| op.inner(q, &r)).collect();
            for (q, c) in basis.iter().zip(coeffs) {
                crate::real::axpy(-c, q, &mut r);
            }
        }
        let nrm = op.inner(&r, &r).sqrt();
        if !(nrm > T::zero()) {
            return Err(Error::breakdown("Gram-Schmidt", j, "snapshot lies in the span of its predecessors"));
        }
        basis.push(r.into_iter().map(|x| x / nrm).collect());
    }
    Ok(basis)
}

/// `cond(U*U)` without the positive-definiteness gate, for diagnostics and sweeps.
pub fn gram_condition<T: Real>(f: &TransferSeries<T>) -> Result<T> {
    let n = f.n();
    let uu = SymMatrix::from_fn(n, |j, k| {
        let (j, k) = (j as isize, k as isize);
        T::lit(0.5) * (f.at(j + k) + f.at(j - k))
    })?;
    condition_number(&uu)
}
