//! Continued-fraction coefficients `γ̂_j, γ_j`.
//!
//! Three routes: from the data measure (phase-space iteration), from the Jacobi matrix
//! by closed-form recursion, and from a known medium by orthogonalizing its snapshots.

use crate::error::{Error, Result};
use crate::forward1d::{half_sine, DiscreteOperator, SnapshotSet};
use crate::linalg::JacobiMatrix;
use crate::real::{axpy, dot, Real};
use crate::romdata::{JacobiRom, SpectralMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaSource {
    Data,
    Reference,
}

impl GammaSource {
    pub fn as_str(self) -> &'static str {
        match self {
            GammaSource::Data => "data",
            GammaSource::Reference => "reference",
        }
    }
}

/// `γ̂_j = ‖û_j‖⁻²` and `γ_j = ‖ŵ_j‖⁻²`, `j = 1..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSet<T> {
    pub ghat: Vec<T>,
    pub g: Vec<T>,
    pub source: GammaSource,
}

impl<T: Real> GammaSet<T> {
    pub fn new(ghat: Vec<T>, g: Vec<T>, source: GammaSource) -> Result<Self> {
        if ghat.len() != g.len() || ghat.is_empty() {
            return Err(Error::invalid("gamma set", "need n >= 1 values of each kind"));
        }
        for (j, (&a, &b)) in ghat.iter().zip(&g).enumerate() {
            if !(a > T::zero() && a.is_finite() && b > T::zero() && b.is_finite()) {
                return Err(Error::breakdown("gamma set", j + 1, "coefficients must be positive and finite"));
            }
        }
        Ok(GammaSet { ghat, g, source })
    }

    pub fn len(&self) -> usize {
        self.ghat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ghat.is_empty()
    }

    /// Largest relative difference over both sequences.
    pub fn max_rel_diff(&self, other: &GammaSet<T>) -> T {
        self.ghat
            .iter()
            .zip(&other.ghat)
            .chain(self.g.iter().zip(&other.g))
            .map(|(&a, &b)| ((a - b) / b).abs())
            .fold(T::zero(), T::max)
    }
}

/// `ξ(x) = −(2/τ²)(1 − x)`.
pub fn xi<T: Real>(tau: T, x: T) -> T {
    -(T::lit(2.0) / (tau * tau)) * (T::one() - x)
}

/// `ξ⁻¹(λ) = 1 + τ²λ/2`.
pub fn xi_inv<T: Real>(tau: T, lambda: T) -> T {
    T::one() + tau * tau * lambda * T::lit(0.5)
}

fn positive<T: Real>(x: T, what: &str, j: usize) -> Result<T> {
    if x > T::lit(1e-300) && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::breakdown(
            "gamma recursion",
            j,
            format!("{what} = {:e} is not positive; the data are inconsistent with a positive medium", x.to_f64_lossy()),
        ))
    }
}

/// Phase-space iteration on the measure.
///
/// With `λ_l = −ξ(θ_l)` and `L = diag(√λ_1, −√λ_1, …, √λ_n, −√λ_n)`, start from
/// `μ̄ = √½ (y_1, y_1, …, y_n, y_n)` and `ω̄ = 0`, then for each `j`:
/// `γ̂_j = ‖μ̄‖⁻²`, `ω̄ += γ̂_j L μ̄`, `γ_j = ‖ω̄‖⁻²`, `μ̄ −= γ_j L ω̄`.
pub fn gammas_from_measure<T: Real>(meas: &SpectralMeasure<T>, tau: T) -> Result<GammaSet<T>> {
    let n = meas.len();
    let half = T::lit(0.5).sqrt();
    let mut l = Vec::with_capacity(2 * n);
    let mut mu = Vec::with_capacity(2 * n);
    for (&t, y) in meas.nodes.iter().zip(meas.amplitudes()) {
        let s = (-xi(tau, t)).sqrt();
        l.extend([s, -s]);
        mu.extend([half * y, half * y]);
    }
    let mut omega = vec![T::zero(); 2 * n];
    let (mut ghat, mut g) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for j in 1..=n {
        let gh = positive(T::one() / dot(&mu, &mu), "gamma-hat", j)?;
        for i in 0..2 * n {
            omega[i] += gh * l[i] * mu[i];
        }
        let gj = positive(T::one() / dot(&omega, &omega), "gamma", j)?;
        for i in 0..2 * n {
            mu[i] -= gj * l[i] * omega[i];
        }
        ghat.push(gh);
        g.push(gj);
    }
    GammaSet::new(ghat, g, GammaSource::Data)
}

/// Closed-form recursion from `(α_j, β_j)`:
/// `γ̂_1 = 1/c`, `γ_j = [(2/τ²)(1 − α_j)γ̂_j − 1/γ_{j−1}]⁻¹` (with `1/γ_0 = 0`),
/// `γ̂_{j+1} = τ⁴ / (4 β_j² γ̂_j γ_j²)`.
pub fn gammas_from_jacobi<T: Real>(rom: &JacobiRom<T>, tau: T) -> Result<GammaSet<T>> {
    let n = rom.order();
    let (alpha, beta) = (rom.jacobi.alpha(), rom.jacobi.beta());
    let two_t2 = T::lit(2.0) / (tau * tau);
    let tau4 = tau * tau * tau * tau;
    let mut ghat = Vec::with_capacity(n);
    let mut g: Vec<T> = Vec::with_capacity(n);
    let mut gh = positive(T::one() / rom.mass, "gamma-hat", 1)?;
    let mut inv_prev = T::zero();
    for j in 0..n {
        let gj = positive(T::one() / (two_t2 * (T::one() - alpha[j]) * gh - inv_prev), "gamma", j + 1)?;
        ghat.push(gh);
        g.push(gj);
        inv_prev = T::one() / gj;
        if j + 1 < n {
            gh = positive(tau4 / (T::lit(4.0) * beta[j] * beta[j] * gh * gj * gj), "gamma-hat", j + 2)?;
        }
    }
    GammaSet::new(ghat, g, GammaSource::Data)
}

/// Inverse of [`gammas_from_jacobi`]:
/// `α_j = 1 − (τ²/2γ̂_j)(1/γ_{j−1} + 1/γ_j)`, `β_j = τ² / (2γ_j √(γ̂_j γ̂_{j+1}))`.
pub fn jacobi_from_gammas<T: Real>(gs: &GammaSet<T>, tau: T) -> Result<JacobiMatrix<T>> {
    let n = gs.len();
    let half_t2 = tau * tau * T::lit(0.5);
    let alpha = (0..n)
        .map(|j| {
            let inv_prev = if j == 0 { T::zero() } else { T::one() / gs.g[j - 1] };
            T::one() - half_t2 / gs.ghat[j] * (inv_prev + T::one() / gs.g[j])
        })
        .collect();
    let beta = (0..n.saturating_sub(1))
        .map(|j| half_t2 / (gs.g[j] * (gs.ghat[j] * gs.ghat[j + 1]).sqrt()))
        .collect();
    JacobiMatrix::new(alpha, beta)
}

/// Orthogonalized primary and dual snapshots of a known medium.
#[derive(Clone, Debug)]
pub struct OrthoSnapshots<T> {
    pub primary: Vec<Vec<T>>,
    pub dual: Vec<Vec<T>>,
    pub gammas: GammaSet<T>,
}

/// Snapshot orthogonalization on a known operator.
///
/// `𝓛 = (2/τ) K G s(A)` maps primary to dual and `𝓛' = (2/τ) s(A) W⁻¹ Gᵀ` maps back,
/// with `s(λ) = sin(τ√λ/2)/√λ`. From `û_1 = b`, `ŵ_0 = 0`:
/// `γ̂_j = ‖û_j‖_W⁻²`, `ŵ_j = ŵ_{j−1} + γ̂_j 𝓛 û_j`, `γ_j = ‖ŵ_j‖_h⁻²`, `û_{j+1} = û_j − γ_j 𝓛' ŵ_j`.
pub fn orthogonalize_reference<T: Real>(op: &DiscreteOperator<T>, b: &[T], tau: T, n: usize) -> Result<OrthoSnapshots<T>> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one snapshot"));
    }
    let scale = T::lit(2.0) / tau;
    let s = |l: T| half_sine(tau, l);
    let mut u = b.to_vec();
    let mut w = vec![T::zero(); b.len()];
    let (mut primary, mut dual) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut ghat, mut g) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for j in 1..=n {
        let gh = positive(T::one() / op.inner(&u, &u), "gamma-hat", j)?;
        let lu = op.flux(&op.apply_fn(s, &u));
        axpy(gh * scale, &lu, &mut w);
        let gj = positive(T::one() / op.dual_inner(&w, &w), "gamma", j)?;
        primary.push(u.clone());
        dual.push(w.clone());
        ghat.push(gh);
        g.push(gj);
        if j < n {
            let lw = op.apply_fn(s, &op.flux_adjoint(&w));
            axpy(-gj * scale, &lw, &mut u);
        }
    }
    Ok(OrthoSnapshots {
        primary,
        dual,
        gammas: GammaSet::new(ghat, g, GammaSource::Reference)?,
    })
}

/// Angles between classical Gram–Schmidt vectors and the orthogonalized snapshots.
#[derive(Clone, Debug)]
pub struct CollinearityReport<T> {
    pub primary_angles: Vec<T>,
    pub dual_angles: Vec<T>,
    /// `d_j` with `û_j^{GS} = d_j⁻¹ û_j`.
    pub primary_scale: Vec<T>,
    pub dual_scale: Vec<T>,
}

impl<T: Real> CollinearityReport<T> {
    pub fn max_angle(&self) -> T {
        self.primary_angles
            .iter()
            .chain(&self.dual_angles)
            .copied()
            .fold(T::zero(), T::max)
    }
}

/// Gram–Schmidt (two passes) on the raw snapshots, compared with `ortho` vector by vector.
pub fn gram_schmidt_check<T: Real>(
    op: &DiscreteOperator<T>,
    snapshots: &SnapshotSet<T>,
    ortho: &OrthoSnapshots<T>,
) -> Result<CollinearityReport<T>> {
    let n = ortho.primary.len();
    if snapshots.len() < n {
        return Err(Error::invalid("n", "fewer snapshots than orthogonalized vectors"));
    }
    let primary_ip = |a: &[T], b: &[T]| op.inner(a, b);
    let dual_ip = |a: &[T], b: &[T]| op.dual_inner(a, b);
    let (primary_angles, primary_scale) = compare(&snapshots.primary[..n], &ortho.primary, primary_ip);
    let (dual_angles, dual_scale) = compare(&snapshots.dual[..n], &ortho.dual, dual_ip);
    Ok(CollinearityReport {
        primary_angles,
        dual_angles,
        primary_scale,
        dual_scale,
    })
}

fn compare<T: Real>(raw: &[Vec<T>], ortho: &[Vec<T>], ip: impl Fn(&[T], &[T]) -> T) -> (Vec<T>, Vec<T>) {
    let mut basis: Vec<Vec<T>> = Vec::new();
    let (mut angles, mut scales) = (Vec::new(), Vec::new());
    for (v, o) in raw.iter().zip(ortho) {
        let mut r = v.clone();
        for _ in 0..2 {
            let coeffs: Vec<T> = basis.iter().map(|q| ip(q, &r)).collect();
            for (q, c) in basis.iter().zip(coeffs) {
                axpy(-c, q, &mut r);
            }
        }
        let rr = ip(&r, &r);
        let oo = ip(o, o);
        let ro = ip(&r, o);
        // sin of the angle: residual of r after projecting onto o.
        let resid: Vec<T> = r.iter().zip(o).map(|(&a, &b)| a - ro / oo * b).collect();
        angles.push((ip(&resid, &resid) / rr).sqrt().asin());
        scales.push(oo / ro);
        let nrm = rr.sqrt();
        basis.push(r.into_iter().map(|x| x / nrm).collect());
    }
    (angles, scales)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward1d::{discretize, propagate_snapshots, source_vector, synthesize};
    use crate::models::builtin_1d;
    use crate::romdata::{assemble_gram, cholesky_rom, lanczos_jacobi, project_snapshots, spectral_measure};
    use proptest::prelude::*;

    fn data_gammas(model: &str, ratio: f64, n: usize) -> (GammaSet<f64>, GammaSet<f64>, SpectralMeasure<f64>, f64) {
        let sigma = 0.01;
        let tau = ratio * sigma;
        let op = discretize(&builtin_1d::<f64>(model).unwrap(), 2000).unwrap();
        let f = synthesize(&op, sigma, tau, 2 * n).unwrap();
        let meas = spectral_measure(&assemble_gram(&f).unwrap()).unwrap();
        let a = gammas_from_measure(&meas, tau).unwrap();
        let b = gammas_from_jacobi(&lanczos_jacobi(&meas).unwrap(), tau).unwrap();
        (a, b, meas, f.mass())
    }

    #[test]
    fn scalar_case() {
        let meas = SpectralMeasure::<f64>::new(vec![0.4], vec![3.0]).unwrap();
        let tau: f64 = 0.02;
        let gs = gammas_from_measure(&meas, tau).unwrap();
        assert!((gs.ghat[0] - 1.0 / 3.0).abs() < 1e-15);
        let want = 1.0 / ((2.0 / (tau * tau)) * (1.0 - 0.4) / 3.0);
        assert!((gs.g[0] / want - 1.0).abs() < 1e-13);
        let rom = lanczos_jacobi(&meas).unwrap();
        let gj = gammas_from_jacobi(&rom, tau).unwrap();
        assert!(gj.max_rel_diff(&gs) < 1e-13);
    }

    #[test]
    fn xi_inverts() {
        let tau: f64 = 0.025;
        for &x in &[-0.9, 0.0, 0.3, 0.99] {
            assert!((xi_inv(tau, xi(tau, x)) - x).abs() < 1e-14);
        }
        assert_eq!(xi(tau, 1.0), 0.0);
    }

    #[test]
    fn measure_and_jacobi_routes_agree() {
        for model in ["constant", "two-layer"] {
            let (a, b, _, mass) = data_gammas(model, 2.5, 25);
            assert!((a.ghat[0] * mass - 1.0).abs() < 1e-10);
            assert!(a.max_rel_diff(&b) < 1e-9, "{model}: {}", a.max_rel_diff(&b));
        }
    }

    #[test]
    fn data_and_medium_routes_agree() {
        let sigma = 0.01;
        let tau = 2.5 * sigma;
        let n = 20;
        for model in ["constant", "two-layer"] {
            let op = discretize(&builtin_1d::<f64>(model).unwrap(), 2000).unwrap();
            let b = source_vector(&op, sigma).unwrap();
            let ortho = orthogonalize_reference(&op, &b, tau, n).unwrap();
            let (a, _, _, _) = data_gammas(model, 2.5, n);
            assert!(a.max_rel_diff(&ortho.gammas) < 1e-6, "{model}");

            // Orthogonality of the produced vectors.
            for i in 0..n {
                for j in 0..n {
                    let pu = op.inner(&ortho.primary[i], &ortho.primary[j]);
                    let pw = op.dual_inner(&ortho.dual[i], &ortho.dual[j]);
                    let (eu, ew) = if i == j {
                        (1.0 / ortho.gammas.ghat[i], 1.0 / ortho.gammas.g[i])
                    } else {
                        (0.0, 0.0)
                    };
                    let su = 1.0 / (ortho.gammas.ghat[i] * ortho.gammas.ghat[j]).sqrt();
                    let sw = 1.0 / (ortho.gammas.g[i] * ortho.gammas.g[j]).sqrt();
                    assert!((pu - eu).abs() < 1e-8 * su, "u {i} {j}");
                    assert!((pw - ew).abs() < 1e-8 * sw, "w {i} {j}");
                }
            }

            // Lanczos equivalence: the Jacobi matrix rebuilt from the medium's gammas is
            // the projection of P onto the orthonormalized snapshots.
            let snaps = propagate_snapshots(&op, &b, tau, n).unwrap();
            let proj = project_snapshots(&op, &snaps, n).unwrap();
            let rebuilt = jacobi_from_gammas(&ortho.gammas, tau).unwrap();
            for j in 0..n {
                assert!((rebuilt.alpha()[j] - proj.get(j, j)).abs() < 1e-7);
                if j + 1 < n {
                    assert!((rebuilt.beta()[j] - proj.get(j, j + 1)).abs() < 1e-7);
                }
            }

            // Span check: each snapshot is reproduced by its projection onto û_1..û_n.
            let nrm = |x: &[f64]| op.inner(x, x).sqrt();
            for u in &snaps.primary {
                let mut r = u.clone();
                for (q, &gh) in ortho.primary.iter().zip(&ortho.gammas.ghat) {
                    let c = op.inner(q, &r) * gh;
                    crate::real::axpy(-c, q, &mut r);
                }
                assert!(nrm(&r) <= 1e-7 * nrm(u));
            }
        }
    }

    #[test]
    fn collinearity_with_gram_schmidt() {
        let sigma = 0.01;
        let tau = 2.5 * sigma;
        let n = 15;
        let op = discretize(&builtin_1d::<f64>("constant").unwrap(), 2000).unwrap();
        let b = source_vector(&op, sigma).unwrap();
        let snaps = propagate_snapshots(&op, &b, tau, n).unwrap();
        let ortho = orthogonalize_reference(&op, &b, tau, n).unwrap();
        let rep = gram_schmidt_check(&op, &snaps, &ortho).unwrap();
        assert!((rep.primary_scale[0] - 1.0).abs() < 1e-12);
        assert!(rep.max_angle() <= 1e-6, "max angle {}", rep.max_angle());
    }

    #[test]
    fn implied_polynomials_are_normalized_and_orthogonal() {
        let tau = 0.025;
        let (gs, _, meas, mass) = data_gammas("two-layer", 2.5, 12);
        let n = gs.len();
        // q_1 = 1, p_0 = 0, p_j = p_{j−1} + γ̂_j q_j, q_{j+1} = q_j + γ_j ξ p_j.
        let eval = |x: f64| {
            let mut q = vec![1.0];
            let mut p = 0.0;
            for j in 0..n - 1 {
                p += gs.ghat[j] * q[j];
                q.push(q[j] + gs.g[j] * x * p);
            }
            q
        };
        assert!(eval(0.0).iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let vals: Vec<Vec<f64>> = meas.nodes.iter().map(|&t| eval(xi(tau, t))).collect();
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..meas.len()).map(|l| meas.weights[l] * vals[l][i] * vals[l][j]).sum();
                let want = if i == j { 1.0 / gs.ghat[i] } else { 0.0 };
                let scale = 1.0 / (gs.ghat[i] * gs.ghat[j]).sqrt();
                assert!((s - want).abs() < 1e-7 * scale, "({i},{j}) {s} vs {want}");
            }
        }
        assert!(mass > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn prop_jacobi_gamma_round_trip(n in 1usize..10, seed in any::<u64>()) {
            let tau = 0.03;
            let mut s = seed | 1;
            let mut rnd = || { s ^= s << 13; s ^= s >> 7; s ^= s << 17; (s >> 11) as f64 / (1u64 << 53) as f64 };
            // Positive gammas always give a valid Jacobi matrix; go there and back.
            let ghat: Vec<f64> = (0..n).map(|_| 0.5 + rnd()).collect();
            let g: Vec<f64> = (0..n).map(|_| (0.5 + rnd()) * tau * tau * 4.0).collect();
            let gs = GammaSet::new(ghat, g, GammaSource::Data).unwrap();
            let j = jacobi_from_gammas(&gs, tau).unwrap();
            let rom = JacobiRom { jacobi: j.clone(), mass: 1.0 / gs.ghat[0] };
            let back = gammas_from_jacobi(&rom, tau).unwrap();
            prop_assert!(back.max_rel_diff(&gs) < 1e-9);
            let j2 = jacobi_from_gammas(&back, tau).unwrap();
            for (a, b) in j.alpha().iter().zip(j2.alpha()) { prop_assert!((a - b).abs() < 1e-9); }
            for (a, b) in j.beta().iter().zip(j2.beta()) { prop_assert!((a - b).abs() < 1e-9); }
        }
    }

    #[test]
    fn cholesky_route_gammas_agree() {
        let sigma = 0.01;
        let tau = 2.5 * sigma;
        let op = discretize(&builtin_1d::<f64>("two-layer").unwrap(), 2000).unwrap();
        let f = synthesize(&op, sigma, tau, 30).unwrap();
        let g = assemble_gram(&f).unwrap();
        let a = gammas_from_jacobi(&cholesky_rom(&g).unwrap(), tau).unwrap();
        let b = gammas_from_measure(&spectral_measure(&g).unwrap(), tau).unwrap();
        assert!(a.max_rel_diff(&b) < 1e-8);
    }
}
