//! One-dimensional inversion: reference optimal grid, gamma ratios, physical nodes.

use crate::error::{Error, Result};
use crate::forward1d::{check_no_return, discretize, source_vector, DiscreteOperator, TransferSeries, VelocityModel};
use crate::gammas::{gammas_from_measure, orthogonalize_reference, GammaSet, OrthoSnapshots};
use crate::real::Real;
use crate::romdata::{assemble_gram, spectral_measure};

/// Centers of mass of the squared orthogonalized reference snapshots, in traveltime.
#[derive(Clone, Debug)]
pub struct TravelTimeGrid<T> {
    pub primary: Vec<T>,
    pub dual: Vec<T>,
    /// Whether `x̃_1 < x̂_1 < x̃_2 < x̂_2 < …` holds strictly.
    pub monotone: bool,
}

impl<T: Real> TravelTimeGrid<T> {
    pub fn len(&self) -> usize {
        self.primary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primary.is_empty()
    }
}

/// `γ̂_j Σ_i t(x_i) û_{j,i}² W_i` and the dual analog with weights `h`, where `t` is the
/// model's traveltime coordinate. The primary weights are the trapezoid weights of
/// `∫ · v⁻² dx` on the primary nodes.
pub fn reference_grid<T: Real>(
    op: &DiscreteOperator<T>,
    ortho: &OrthoSnapshots<T>,
    model: &VelocityModel<T>,
) -> TravelTimeGrid<T> {
    let tp: Vec<T> = op.grid().primary_nodes().iter().map(|&x| model.traveltime(x)).collect();
    let td: Vec<T> = op.grid().dual_nodes().iter().map(|&x| model.traveltime(x)).collect();
    let (primary, dual) = centers_of_mass(op, ortho, &tp, &td);
    let monotone = interleaved(&primary, &dual);
    TravelTimeGrid { primary, dual, monotone }
}

/// Centers of mass of `ortho` with respect to arbitrary coordinates on each grid.
pub fn centers_of_mass<T: Real>(
    op: &DiscreteOperator<T>,
    ortho: &OrthoSnapshots<T>,
    primary_coord: &[T],
    dual_coord: &[T],
) -> (Vec<T>, Vec<T>) {
    let w = op.weights();
    let h = op.grid().h();
    let primary = ortho
        .primary
        .iter()
        .zip(&ortho.gammas.ghat)
        .map(|(u, &gh)| gh * (0..u.len()).map(|i| primary_coord[i] * u[i] * u[i] * w[i]).sum::<T>())
        .collect();
    let dual = ortho
        .dual
        .iter()
        .zip(&ortho.gammas.g)
        .map(|(v, &g)| g * h * (0..v.len()).map(|i| dual_coord[i] * v[i] * v[i]).sum::<T>())
        .collect();
    (primary, dual)
}

fn interleaved<T: Real>(primary: &[T], dual: &[T]) -> bool {
    let seq: Vec<T> = primary.iter().zip(dual).flat_map(|(&p, &d)| [p, d]).collect();
    seq.windows(2).all(|w| w[1] > w[0])
}

impl<T: Real> InversionResult<T> {
    /// `(physical position, estimate)` pairs ordered `x_1, x̂_1, x_2, x̂_2, …`.
    pub fn interleaved(&self) -> Vec<(T, T)> {
        let (p, e) = (&self.physical, &self.estimates);
        (0..p.primary.len())
            .flat_map(|j| [(p.primary[j], e.primary[j]), (p.dual[j], e.dual[j])])
            .collect()
    }
}

/// Velocity estimates on the traveltime grid.
#[derive(Clone, Debug)]
pub struct Estimates<T> {
    pub primary: Vec<T>,
    pub dual: Vec<T>,
}

/// `v(x̃_j) ≈ v⁰(x̃_j)·γ̂⁰_j/γ̂_j` and `v(x̂_j) ≈ v⁰(x̂_j)·γ_j/γ⁰_j`.
pub fn reconstruct<T: Real>(
    data: &GammaSet<T>,
    reference: &GammaSet<T>,
    grid: &TravelTimeGrid<T>,
    v0: &VelocityModel<T>,
) -> Result<Estimates<T>> {
    let n = data.len();
    if reference.len() != n || grid.len() != n {
        return Err(Error::invalid(
            "n",
            format!("data has {n} coefficients, reference {}, grid {}", reference.len(), grid.len()),
        ));
    }
    let at = |t: T| v0.speed(v0.inverse_traveltime(t));
    let primary = (0..n).map(|j| at(grid.primary[j]) * reference.ghat[j] / data.ghat[j]).collect();
    let dual = (0..n).map(|j| at(grid.dual[j]) * data.g[j] / reference.g[j]).collect();
    Ok(Estimates { primary, dual })
}

/// Physical positions of the grid nodes.
#[derive(Clone, Debug)]
pub struct PhysicalNodes<T> {
    pub primary: Vec<T>,
    pub dual: Vec<T>,
}

/// Alternating Riemann sums with `x̃_0 = x_0 = 0`:
/// `x̂_j = x_{j−1} + (t̂_j − t_{j−1})·v(t̂_j)` and `x_j = x̂_j + (t_j − t̂_j)·v(t_j)`.
pub fn to_physical<T: Real>(grid: &TravelTimeGrid<T>, est: &Estimates<T>) -> PhysicalNodes<T> {
    let n = grid.len();
    let (mut primary, mut dual) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut x, mut t) = (T::zero(), T::zero());
    for j in 0..n {
        let xd = x + (grid.dual[j] - t) * est.dual[j];
        x = xd + (grid.primary[j] - grid.dual[j]) * est.primary[j];
        t = grid.primary[j];
        dual.push(xd);
        primary.push(x);
    }
    PhysicalNodes { primary, dual }
}

#[derive(Clone, Debug)]
pub struct Diagnostics<T> {
    pub cond_uu: T,
    pub tau: T,
    pub sigma: T,
    pub n: usize,
    pub monotone: bool,
    /// `|γ̂⁰_1/γ̂_1 − 1|`: nonzero when the data's `v(0)` differs from the reference's.
    pub origin_mismatch: T,
}

#[derive(Clone, Debug)]
pub struct InversionResult<T> {
    pub grid: TravelTimeGrid<T>,
    pub estimates: Estimates<T>,
    pub physical: PhysicalNodes<T>,
    pub data_gammas: GammaSet<T>,
    pub reference_gammas: GammaSet<T>,
    pub diagnostics: Diagnostics<T>,
}

#[derive(Clone, Debug)]
pub struct InvertConfig {
    /// Solver grid nodes for the reference medium.
    pub m: usize,
    /// Number of snapshots to use; `None` takes all the data supports.
    pub n: Option<usize>,
}

impl Default for InvertConfig {
    fn default() -> Self {
        InvertConfig {
            m: crate::forward1d::DEFAULT_NODES,
            n: None,
        }
    }
}

/// Reference medium `v⁰ ≡ v(0)` on `[0, xmax]`.
pub fn default_reference<T: Real>(v_origin: T, xmax: T) -> Result<VelocityModel<T>> {
    VelocityModel::constant(v_origin, xmax, crate::forward1d::Role::Reference)
}

/// Everything computed on the reference medium for a given `(σ, τ, n)`.
#[derive(Clone, Debug)]
pub struct ReferenceSetup<T> {
    pub op: DiscreteOperator<T>,
    pub ortho: OrthoSnapshots<T>,
    pub grid: TravelTimeGrid<T>,
}

pub fn prepare_reference<T: Real>(v0: &VelocityModel<T>, m: usize, sigma: T, tau: T, n: usize) -> Result<ReferenceSetup<T>> {
    check_no_return(v0, tau, 2 * n)?;
    let op = discretize(v0, m)?;
    let b = source_vector(&op, sigma)?;
    let ortho = orthogonalize_reference(&op, &b, tau, n)?;
    let grid = reference_grid(&op, &ortho, v0);
    Ok(ReferenceSetup { op, ortho, grid })
}

/// End-to-end inversion of a measured series against a reference medium.
pub fn invert<T: Real>(f: &TransferSeries<T>, v0: &VelocityModel<T>, config: &InvertConfig) -> Result<InversionResult<T>> {
    let f = match config.n {
        Some(n) => f.truncated(n)?,
        None => f.clone(),
    };
    let n = f.n();
    let gram = assemble_gram(&f)?;
    let meas = spectral_measure(&gram)?;
    let data_gammas = gammas_from_measure(&meas, f.tau())?;
    let reference = prepare_reference(v0, config.m, f.sigma(), f.tau(), n)?;
    let estimates = reconstruct(&data_gammas, &reference.ortho.gammas, &reference.grid, v0)?;
    let physical = to_physical(&reference.grid, &estimates);
    let reference_gammas = reference.ortho.gammas;
    let diagnostics = Diagnostics {
        cond_uu: gram.cond_uu,
        tau: f.tau(),
        sigma: f.sigma(),
        n,
        monotone: reference.grid.monotone,
        origin_mismatch: (reference_gammas.ghat[0] / data_gammas.ghat[0] - T::one()).abs(),
    };
    Ok(InversionResult {
        grid: reference.grid,
        estimates,
        physical,
        data_gammas,
        reference_gammas,
        diagnostics,
    })
}

/// Centers of mass of the true medium against the reference grid.
#[derive(Clone, Debug)]
pub struct ComComparison<T> {
    /// `γ̂_j Σ x_i û_{j,i}² W_i` on the true medium, physical coordinate.
    pub true_physical: Vec<T>,
    /// Same, in the true medium's traveltime coordinate.
    pub true_traveltime: Vec<T>,
    /// Reference traveltime nodes `x̃⁰_j`.
    pub reference_traveltime: Vec<T>,
    /// `x̃⁰_j` mapped through the true inverse traveltime map.
    pub reference_mapped: Vec<T>,
    /// Physical nodes recovered by the inversion.
    pub approx_physical: Vec<T>,
    pub xmax: T,
}

impl<T: Real> ComComparison<T> {
    /// `max_j |true_physical_j − reference_mapped_j| / xmax`.
    pub fn max_discrepancy(&self) -> T {
        max_abs_diff(&self.true_physical, &self.reference_mapped) / self.xmax
    }

    /// `max_j |true_physical_j − approx_physical_j| / xmax`.
    pub fn max_approx_discrepancy(&self) -> T {
        max_abs_diff(&self.true_physical, &self.approx_physical) / self.xmax
    }
}

fn max_abs_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).fold(T::zero(), T::max)
}

/// Orthogonalizes the true medium's snapshots and compares their centers of mass
/// with the reference grid of `result`.
pub fn compare_centers_of_mass<T: Real>(
    truth: &VelocityModel<T>,
    m: usize,
    result: &InversionResult<T>,
) -> Result<ComComparison<T>> {
    let d = &result.diagnostics;
    let op = discretize(truth, m)?;
    let b = source_vector(&op, d.sigma)?;
    let ortho = orthogonalize_reference(&op, &b, d.tau, d.n)?;
    let xp = op.grid().primary_nodes().to_vec();
    let xd = op.grid().dual_nodes().to_vec();
    let (true_physical, _) = centers_of_mass(&op, &ortho, &xp, &xd);
    let tp: Vec<T> = xp.iter().map(|&x| truth.traveltime(x)).collect();
    let td: Vec<T> = xd.iter().map(|&x| truth.traveltime(x)).collect();
    let (true_traveltime, _) = centers_of_mass(&op, &ortho, &tp, &td);
    let reference_mapped = result.grid.primary.iter().map(|&t| truth.inverse_traveltime(t)).collect();
    Ok(ComComparison {
        true_physical,
        true_traveltime,
        reference_traveltime: result.grid.primary.clone(),
        reference_mapped,
        approx_physical: result.physical.primary.clone(),
        xmax: truth.xmax(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward1d::{synthesize, Role};
    use crate::models::{builtin_1d, TWO_LAYER};

    const SIGMA: f64 = 0.01;

    fn run(truth: &VelocityModel<f64>, m: usize, ratio: f64, n: usize) -> InversionResult<f64> {
        let tau = ratio * SIGMA;
        let op = discretize(truth, m).unwrap();
        let f = synthesize(&op, SIGMA, tau, 2 * n).unwrap();
        let v0 = default_reference(truth.origin_speed(), truth.xmax()).unwrap();
        invert(&f, &v0, &InvertConfig { m, n: None }).unwrap()
    }

    #[test]
    fn identity_inversion() {
        let truth = builtin_1d::<f64>("constant").unwrap();
        let r = run(&truth, 2000, 2.5, 25);
        for v in r.estimates.primary.iter().chain(&r.estimates.dual) {
            assert!((v - 1.0).abs() < 1e-6);
        }
        assert!(r.diagnostics.monotone);
        assert!(r.diagnostics.origin_mismatch < 1e-9);
        // Constant estimates: physical node = traveltime node.
        for (x, t) in r.physical.primary.iter().zip(&r.grid.primary) {
            assert!((x - t).abs() < 1e-6);
        }
    }

    #[test]
    fn rescaled_constant_media() {
        for k in [0.5f64, 2.0] {
            let xmax = k.max(1.0);
            let truth = VelocityModel::constant(k, xmax, Role::True).unwrap();
            let r = run(&truth, (2000.0 * xmax) as usize, 2.5, 25);
            for v in r.estimates.primary.iter().chain(&r.estimates.dual) {
                assert!((v / k - 1.0).abs() < 1e-2, "k = {k}: {v}");
            }
        }
    }

    #[test]
    fn traveltime_grid_is_speed_invariant() {
        let tau = 2.5 * SIGMA;
        let a = prepare_reference(&default_reference(1.0, 1.0).unwrap(), 2000, SIGMA, tau, 10).unwrap();
        let b = prepare_reference(&default_reference(2.0, 2.0).unwrap(), 2000, SIGMA, tau, 10).unwrap();
        for (x, y) in a.grid.primary.iter().zip(&b.grid.primary) {
            assert!((x - y).abs() < 1e-9);
        }
        for (x, y) in a.grid.dual.iter().zip(&b.grid.dual) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn first_node_is_source_center_of_mass() {
        let tau = 2.5 * SIGMA;
        let r = prepare_reference(&default_reference(1.0, 1.0).unwrap(), 2000, SIGMA, tau, 1).unwrap();
        // b² ∝ exp(−2x²/σ²) on the half-line: mean σ/√(2π).
        let want = SIGMA / (2.0 * std::f64::consts::PI).sqrt();
        assert!((r.grid.primary[0] - want).abs() < 0.02 * want, "{} vs {want}", r.grid.primary[0]);
    }

    #[test]
    fn two_layer_inversion_tracks_the_step() {
        let truth = builtin_1d::<f64>("two-layer").unwrap();
        let r = run(&truth, 2000, 2.5, 25);
        let (x_if, v1, v2) = TWO_LAYER;
        let h_node = 2.5 * SIGMA;
        for (x, v) in r.physical.primary.iter().zip(&r.estimates.primary) {
            if (x - x_if).abs() > 2.0 * h_node {
                let want = if *x < x_if { v1 } else { v2 };
                assert!((v / want - 1.0).abs() < 0.1, "x = {x}: {v}");
            }
        }
        // Interface located within two nodes: first primary node estimated above the midpoint speed.
        // Interface within two nodes of the interleaved sequence.
        let nodes = r.interleaved();
        let hit = nodes.iter().position(|&(_, v)| v > 0.5 * (v1 + v2)).unwrap();
        let loc = nodes[hit].0;
        let between = nodes.iter().filter(|&&(x, _)| x >= x_if.min(loc) && x < x_if.max(loc)).count();
        assert!(between <= 2, "interface at {loc}, {between} nodes away");
        let com = compare_centers_of_mass(&truth, 2000, &r).unwrap();
        assert!(com.max_discrepancy() <= 0.05);
    }

    #[test]
    fn physical_nodes_for_constant_estimates() {
        let grid = TravelTimeGrid {
            primary: vec![0.1f64, 0.3, 0.5],
            dual: vec![0.2, 0.4, 0.6],
            monotone: true,
        };
        let est = Estimates {
            primary: vec![2.0; 3],
            dual: vec![2.0; 3],
        };
        let p = to_physical(&grid, &est);
        for (x, t) in p.primary.iter().zip(&grid.primary) {
            assert!((x - 2.0 * t).abs() < 1e-15);
        }
        assert!((p.dual[0] - 0.2 * 2.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let a = GammaSet::new(vec![1.0], vec![1.0], crate::gammas::GammaSource::Data).unwrap();
        let b = GammaSet::new(vec![1.0, 1.0], vec![1.0, 1.0], crate::gammas::GammaSource::Reference).unwrap();
        let grid = TravelTimeGrid {
            primary: vec![0.1],
            dual: vec![0.2],
            monotone: true,
        };
        let v0 = default_reference(1.0, 1.0).unwrap();
        assert!(reconstruct(&a, &b, &grid, &v0).is_err());
    }
}
