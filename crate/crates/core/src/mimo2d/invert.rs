use super::block::{block_gammas, block_gram, block_measure, BlockGammaSet, BlockTransferSeries};
use super::field::{default_ymax, VelocityField2D, DEFAULT_APERTURE, DEFAULT_NX, DEFAULT_NY, DEFAULT_XMAX};
use super::operator::forward2d;
use crate::error::{Error, Result};
use crate::forward1d::{Role, VelocityModel, DEFAULT_NODES};
use crate::invert1d::{prepare_reference, to_physical, Estimates, PhysicalNodes, TravelTimeGrid};
use crate::real::Real;

/// Geometry of the 2D solver grid; must match the one that produced the data.
#[derive(Clone, Debug)]
pub struct Invert2dConfig<T> {
    pub nx: usize,
    pub ny: usize,
    pub xmax: T,
    pub ymax: T,
    /// Grid nodes of the 1D reference run that fixes the `ζ` nodes.
    pub reference_nodes: usize,
}

impl<T: Real> Default for Invert2dConfig<T> {
    fn default() -> Self {
        Invert2dConfig {
            nx: DEFAULT_NX,
            ny: DEFAULT_NY,
            xmax: T::lit(DEFAULT_XMAX),
            ymax: default_ymax(T::lit(DEFAULT_APERTURE)),
            reference_nodes: DEFAULT_NODES,
        }
    }
}

/// Estimates along one ray line `ν = y^i`.
#[derive(Clone, Debug)]
pub struct RayLine<T> {
    pub nu: T,
    pub estimates: Estimates<T>,
    pub physical: PhysicalNodes<T>,
}

#[derive(Clone, Debug)]
pub struct Inversion2D<T> {
    /// Shared `ζ⁰` nodes (traveltime along the rays of the constant background).
    pub grid: TravelTimeGrid<T>,
    pub lines: Vec<RayLine<T>>,
    pub data_gammas: BlockGammaSet<T>,
    pub reference_gammas: BlockGammaSet<T>,
    pub cond_uu: T,
}

/// Ray-coordinate inversion against the constant background `v0`.
///
/// Primary: `ṽ = v0·(Γ̂_j⁻¹)_ii / (Γ̂⁰_j⁻¹)_ii`; dual: `ṽ = v0·(Γ_j)_ii / (Γ⁰_j)_ii`.
/// Both reduce to the 1D ratios when `m = 1`. Only diagonals are used.
pub fn invert2d<T: Real>(fs: &BlockTransferSeries<T>, v0: T, config: &Invert2dConfig<T>) -> Result<Inversion2D<T>> {
    if !(v0 > T::zero()) {
        return Err(Error::invalid("v0", "reference speed must be positive"));
    }
    let (n, tau, sigma) = (fs.n(), fs.tau(), fs.sigma());
    let gram = block_gram(fs)?;
    let meas = block_measure(&gram)?;
    let data_gammas = block_gammas(&meas, tau)?;

    let background = VelocityField2D::constant(v0, config.nx, config.ny, config.xmax, config.ymax)?;
    let ref_series = forward2d(&background, fs.sources(), sigma, tau, 2 * n)?;
    let ref_meas = block_measure(&block_gram(&ref_series)?)?;
    let reference_gammas = block_gammas(&ref_meas, tau)?;

    let model = VelocityModel::constant(v0, config.xmax, Role::Reference)?;
    let grid = prepare_reference(&model, config.reference_nodes, sigma, tau, n)?.grid;

    let lines = (0..fs.m())
        .map(|i| {
            let primary = (0..n)
                .map(|j| v0 * data_gammas.ghat_inv[j].get(i, i) / reference_gammas.ghat_inv[j].get(i, i))
                .collect();
            let dual = (0..n)
                .map(|j| v0 * data_gammas.g[j].get(i, i) / reference_gammas.g[j].get(i, i))
                .collect();
            let estimates = Estimates { primary, dual };
            let physical = to_physical(&grid, &estimates);
            RayLine {
                nu: fs.sources()[i],
                estimates,
                physical,
            }
        })
        .collect();
    Ok(Inversion2D {
        grid,
        lines,
        data_gammas,
        reference_gammas,
        cond_uu: gram.cond_uu,
    })
}
