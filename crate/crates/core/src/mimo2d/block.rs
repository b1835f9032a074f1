//! Block (matrix-valued) versions of the data-driven ROM machinery.

use crate::error::{Error, Result};
use crate::gammas::xi;
use crate::linalg::{cholesky, inv_spd, inv_sqrt_spd, sqrt_spd, sym_eig_named, Matrix, SymMatrix};
use crate::real::Real;
use crate::romdata::PD_TOLERANCE;

/// Symmetry tolerance for measured blocks, relative to `max|F_k|`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Rank tolerance for block Lanczos, relative to the largest eigenvalue of `RᵀR`.
pub const RANK_TOL: f64 = 1e-12;

/// Square MIMO samples `F_0, …, F_{2n−1}` for `m` collocated sources and receivers.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTransferSeries<T> {
    tau: T,
    sigma: T,
    sources: Vec<T>,
    blocks: Vec<SymMatrix<T>>,
}

impl<T: Real> BlockTransferSeries<T> {
    /// `blocks[k]` holds `F_k` row-major. Each block must be symmetric to
    /// [`SYMMETRY_TOL`]; the stored block is its symmetric part.
    pub fn new(tau: T, sigma: T, sources: Vec<T>, blocks: Vec<Vec<T>>) -> Result<Self> {
        if !(tau > T::zero() && sigma > T::zero()) || !(tau.is_finite() && sigma.is_finite()) {
            return Err(Error::invalid("tau/sigma", "must be positive and finite"));
        }
        let m = sources.len();
        if m == 0 {
            return Err(Error::invalid("sources", "need at least one source"));
        }
        if blocks.is_empty() || !blocks.len().is_multiple_of(2) {
            return Err(Error::invalid(
                "block series",
                format!("need an even, nonzero number of blocks (2n), got {}", blocks.len()),
            ));
        }
        let mut out = Vec::with_capacity(blocks.len());
        for (k, b) in blocks.into_iter().enumerate() {
            let mat = Matrix::from_row_major(m, m, b)
                .map_err(|_| Error::invalid("block series", format!("block {k} is not {m} x {m}")))?;
            if !mat.is_finite() {
                return Err(Error::invalid("block series", format!("block {k} has non-finite entries")));
            }
            let asym = mat.sub(&mat.transpose()).max_abs();
            if asym > T::lit(SYMMETRY_TOL) * mat.max_abs() {
                return Err(Error::invalid(
                    "block series",
                    format!(
                        "block {k} violates reciprocity: max|F - F^T| = {:e}",
                        asym.to_f64_lossy()
                    ),
                ));
            }
            out.push(SymMatrix::symmetrize(&mat)?);
        }
        let eig = sym_eig_named(&out[0], "F_0")?;
        let top = eig.values[m - 1];
        if !(top > T::zero()) || eig.values[0] < -T::lit(1e-12) * top {
            return Err(Error::invalid("block series", "F_0 is not positive semidefinite"));
        }
        Ok(BlockTransferSeries {
            tau,
            sigma,
            sources,
            blocks: out,
        })
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn sources(&self) -> &[T] {
        &self.sources
    }

    pub fn m(&self) -> usize {
        self.sources.len()
    }

    pub fn n(&self) -> usize {
        self.blocks.len() / 2
    }

    pub fn blocks(&self) -> &[SymMatrix<T>] {
        &self.blocks
    }

    /// `F_{|k|}`.
    pub fn at(&self, k: isize) -> &SymMatrix<T> {
        &self.blocks[k.unsigned_abs()]
    }

    /// The first `2n` blocks.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n() {
            return Err(Error::invalid("n", format!("must be in 1..={}, got {n}", self.n())));
        }
        let mut out = self.clone();
        out.blocks.truncate(2 * n);
        Ok(out)
    }

    /// Scalar series of source `a` alone (the `(a, a)` entries).
    pub fn diagonal_series(&self, a: usize) -> Result<crate::forward1d::TransferSeries<T>> {
        crate::forward1d::TransferSeries::new(self.tau, self.sigma, self.blocks.iter().map(|b| b.get(a, a)).collect())
    }
}

/// Block Gram matrices, `mn × mn`.
#[derive(Clone, Debug)]
pub struct BlockGramPair<T> {
    pub uu: SymMatrix<T>,
    pub upu: SymMatrix<T>,
    pub cond_uu: T,
    pub m: usize,
}

/// Block `(j, k)` of `U*U` is `½(F_{j+k} + F_{|j−k|})`; `U*PU` uses the four-term analog.
pub fn block_gram<T: Real>(fs: &BlockTransferSeries<T>) -> Result<BlockGramPair<T>> {
    let (m, n) = (fs.m(), fs.n());
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let split = |r: usize| ((r / m) as isize, r % m);
    let uu = SymMatrix::from_fn(m * n, |r, c| {
        let ((j, a), (k, b)) = (split(r), split(c));
        half * (fs.at(j + k).get(a, b) + fs.at(j - k).get(a, b))
    })?;
    let upu = SymMatrix::from_fn(m * n, |r, c| {
        let ((j, a), (k, b)) = (split(r), split(c));
        let f = |i: isize| fs.at(i).get(a, b);
        quarter * (f(j + k + 1) + f(j + k - 1) + f(j - k + 1) + f(j - k - 1))
    })?;
    let eig = sym_eig_named(&uu, "block snapshot Gram matrix U*U")?;
    let top = *eig.values.last().expect("order >= 1");
    let bottom = eig.values[0];
    let cond = if bottom > T::zero() { top / bottom } else { T::infinity() };
    if !(bottom > T::lit(PD_TOLERANCE) * top) {
        return Err(Error::IllConditioned { cond: cond.to_f64_lossy() });
    }
    Ok(BlockGramPair { uu, upu, cond_uu: cond, m })
}

/// Block measure: `mn` nodes `θ_l` with vector weights `Y_l ∈ R^m` (row `l` of `chi`).
#[derive(Clone, Debug)]
pub struct BlockMeasure<T> {
    pub nodes: Vec<T>,
    pub chi: Matrix<T>,
    /// `C = F_0`.
    pub mass: SymMatrix<T>,
}

impl<T: Real> BlockMeasure<T> {
    pub fn m(&self) -> usize {
        self.chi.cols()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ_l Y_l Y_lᵀ`, which equals `F_0`.
    pub fn total_weight(&self) -> Matrix<T> {
        self.chi.transpose().matmul(&self.chi)
    }

    /// `Σ_l Y_l Y_lᵀ T_k(θ_l)`, `k < count`.
    pub fn moments(&self, count: usize) -> Vec<Matrix<T>> {
        let m = self.m();
        let mut prev = vec![T::one(); self.len()];
        let mut cur = self.nodes.clone();
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let t = if k == 0 { &prev } else { &cur };
            out.push(Matrix::from_fn(m, m, |a, b| {
                (0..self.len()).map(|l| self.chi[(l, a)] * self.chi[(l, b)] * t[l]).sum()
            }));
            if k >= 1 {
                let next = cur
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
}

/// Eigenvalues `Θ` of `L⁻¹ (U*PU) L⁻ᵀ` and `χ = Xᵀ Lᵀ E_1`, so row `l` of `χ` is
/// `(L_11 X_{0:m, l})ᵀ`. Repeated nodes are allowed.
pub fn block_measure<T: Real>(g: &BlockGramPair<T>) -> Result<BlockMeasure<T>> {
    let m = g.m;
    let ch = cholesky(&g.uu)?;
    let h = ch.congruence(&g.upu)?;
    let eig = sym_eig_named(&h, "block pencil (U*PU, U*U)")?;
    let l = ch.factor();
    let size = h.order();
    let chi = Matrix::from_fn(size, m, |r, a| (0..=a).map(|i| l[(a, i)] * eig.vectors[(i, r)]).sum());
    for (j, &t) in eig.values.iter().enumerate() {
        if !(t > -T::one() && t < T::one()) {
            return Err(Error::breakdown(
                "block measure",
                j,
                format!("node {:e} lies outside (-1, 1)", t.to_f64_lossy()),
            ));
        }
    }
    let mass = SymMatrix::from_fn(m, |a, b| g.uu.get(a, b))?;
    Ok(BlockMeasure {
        nodes: eig.values,
        chi,
        mass,
    })
}

/// Block-tridiagonal `P_n` with data scale `C^{1/2}`.
#[derive(Clone, Debug)]
pub struct BlockRom<T> {
    pub alpha: Vec<SymMatrix<T>>,
    /// `β_j = (R_jᵀR_j)^{1/2}`, sub-diagonal block `(j+1, j)`.
    pub beta: Vec<SymMatrix<T>>,
    pub c_half: SymMatrix<T>,
    /// Lanczos blocks `Q_j` (`mn × m`) in the measure's coordinates.
    pub basis: Vec<Matrix<T>>,
}

impl<T: Real> BlockRom<T> {
    pub fn m(&self) -> usize {
        self.c_half.order()
    }

    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    pub fn dense(&self) -> Matrix<T> {
        let (m, n) = (self.m(), self.order());
        let mut p = Matrix::zeros(m * n, m * n);
        for j in 0..n {
            p.set_block(j * m, j * m, self.alpha[j].as_matrix());
        }
        for (j, b) in self.beta.iter().enumerate() {
            p.set_block((j + 1) * m, j * m, b.as_matrix());
            p.set_block(j * m, (j + 1) * m, &b.as_matrix().transpose());
        }
        p
    }

    /// `C^{1/2} E_1ᵀ T_k(P_n) E_1 C^{1/2}`, `k < count`.
    pub fn transfer(&self, count: usize) -> Vec<Matrix<T>> {
        let (m, size) = (self.m(), self.m() * self.order());
        let p = self.dense();
        let mut prev = Matrix::from_fn(size, m, |r, c| if r == c { T::one() } else { T::zero() });
        let mut cur = p.matmul(&prev);
        let c = self.c_half.as_matrix();
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let x = if k == 0 { &prev } else { &cur };
            out.push(c.matmul(&x.block(0, 0, m, m)).matmul(c));
            if k >= 1 {
                let next = p.matmul(&cur).scaled(T::lit(2.0)).sub(&prev);
                prev = std::mem::replace(&mut cur, next);
            }
        }
        out
    }
}

fn scale_rows<T: Real>(d: &[T], x: &Matrix<T>) -> Matrix<T> {
    Matrix::from_fn(x.rows(), x.cols(), |r, c| d[r] * x[(r, c)])
}

/// Block Lanczos on `diag(Θ)` from `Q_1 = χ C^{−1/2}`, with full reorthogonalization.
pub fn block_lanczos<T: Real>(meas: &BlockMeasure<T>) -> Result<BlockRom<T>> {
    let m = meas.m();
    let n = meas.len() / m;
    let c_half = sqrt_spd(&meas.mass)?;
    let q1 = meas.chi.matmul(inv_sqrt_spd(&meas.mass)?.as_matrix());
    let mut basis = vec![q1];
    let mut alpha = Vec::with_capacity(n);
    let mut beta: Vec<SymMatrix<T>> = Vec::with_capacity(n.saturating_sub(1));
    for j in 0..n {
        let tq = scale_rows(&meas.nodes, &basis[j]);
        let a = SymMatrix::symmetrize(&basis[j].transpose().matmul(&tq))?;
        if j + 1 == n {
            alpha.push(a);
            break;
        }
        let mut r = tq.sub(&basis[j].matmul(a.as_matrix()));
        if j > 0 {
            r = r.sub(&basis[j - 1].matmul(beta[j - 1].as_matrix()));
        }
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                r = r.sub(&q.matmul(&q.transpose().matmul(&r)));
            }
        }
        let rtr = SymMatrix::symmetrize(&r.transpose().matmul(&r))?;
        let eig = sym_eig_named(&rtr, "block Lanczos R^T R")?;
        let (lo, hi) = (eig.values[0], eig.values[m - 1]);
        if !(lo > T::lit(RANK_TOL) * hi) || !(hi > T::zero()) {
            return Err(Error::breakdown(
                "block Lanczos",
                j + 1,
                format!(
                    "beta block is rank deficient (eigenvalues of R^T R from {:e} to {:e})",
                    lo.to_f64_lossy(),
                    hi.to_f64_lossy()
                ),
            ));
        }
        let b = eig.function_matrix(|l| l.sqrt());
        let b_inv = eig.function_matrix(|l| T::one() / l.sqrt());
        basis.push(r.matmul(b_inv.as_matrix()));
        beta.push(b);
    }
    Ok(BlockRom {
        alpha,
        beta,
        c_half,
        basis,
    })
}

/// `max_k max|F̃_k − F_k| / max|F_0|` between a ROM and the data it was built from.
pub fn block_data_mismatch<T: Real>(rom: &BlockRom<T>, fs: &BlockTransferSeries<T>) -> T {
    let scale = fs.at(0).as_matrix().max_abs();
    rom.transfer(fs.blocks().len())
        .iter()
        .zip(fs.blocks())
        .map(|(a, b)| a.sub(b.as_matrix()).max_abs() / scale)
        .fold(T::zero(), T::max)
}

/// `Γ̂_j` and `Γ_j`, with `Γ̂_j⁻¹` kept for the imaging diagonals.
#[derive(Clone, Debug)]
pub struct BlockGammaSet<T> {
    pub ghat: Vec<SymMatrix<T>>,
    pub g: Vec<SymMatrix<T>>,
    pub ghat_inv: Vec<SymMatrix<T>>,
}

impl<T: Real> BlockGammaSet<T> {
    pub fn len(&self) -> usize {
        self.ghat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ghat.is_empty()
    }

    /// Diagonal of `Γ̂_j⁻¹`.
    pub fn ghat_vec(&self, j: usize) -> Vec<T> {
        diagonal(&self.ghat_inv[j])
    }

    /// Diagonal of `Γ_j`.
    pub fn gamma_vec(&self, j: usize) -> Vec<T> {
        diagonal(&self.g[j])
    }
}

fn diagonal<T: Real>(a: &SymMatrix<T>) -> Vec<T> {
    (0..a.order()).map(|i| a.get(i, i)).collect()
}

fn spd_inverse<T: Real>(a: SymMatrix<T>, what: &str, j: usize) -> Result<SymMatrix<T>> {
    inv_spd(&a).map_err(|_| {
        Error::breakdown(
            "block gamma recursion",
            j,
            format!("{what} lost positive definiteness; the block Gram matrix is too ill-conditioned"),
        )
    })
}

/// Matrix phase-space iteration: with `L = diag(√λ_l, −√λ_l)` and
/// `μ̄_1 = √½ [Y; Y]`, `ω̄_0 = 0`:
/// `Γ̂_j = (μ̄_jᵀμ̄_j)⁻¹`, `ω̄_j = ω̄_{j−1} + L μ̄_j Γ̂_j`, `Γ_j = (ω̄_jᵀω̄_j)⁻¹`,
/// `μ̄_{j+1} = μ̄_j − L ω̄_j Γ_j`.
pub fn block_gammas<T: Real>(meas: &BlockMeasure<T>, tau: T) -> Result<BlockGammaSet<T>> {
    let m = meas.m();
    let size = meas.len();
    let n = size / m;
    let half = T::lit(0.5).sqrt();
    let mut l = Vec::with_capacity(2 * size);
    for &t in &meas.nodes {
        let s = (-xi(tau, t)).sqrt();
        l.extend([s, -s]);
    }
    let mut mu = Matrix::from_fn(2 * size, m, |r, c| half * meas.chi[(r / 2, c)]);
    let mut omega = Matrix::zeros(2 * size, m);
    let (mut ghat, mut g, mut ghat_inv) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for j in 1..=n {
        let gram = SymMatrix::symmetrize(&mu.transpose().matmul(&mu))?;
        let gh = spd_inverse(gram.clone(), "mu^T mu", j)?;
        omega = omega.add(&scale_rows(&l, &mu).matmul(gh.as_matrix()));
        let gram_w = SymMatrix::symmetrize(&omega.transpose().matmul(&omega))?;
        let gj = spd_inverse(gram_w, "omega^T omega", j)?;
        mu = mu.sub(&scale_rows(&l, &omega).matmul(gj.as_matrix()));
        ghat.push(gh);
        g.push(gj);
        ghat_inv.push(gram);
    }
    Ok(BlockGammaSet { ghat, g, ghat_inv })
}
