//! Built-in desk-scale media. Parameters are illustrative choices, not measured data.

use crate::error::{Error, Result};
use crate::forward1d::{Role, VelocityModel};
use crate::real::Real;

pub const BUILTIN_1D: [&str; 4] = ["constant", "two-layer", "smooth-bump", "three-feature"];

/// Interface depth and speeds of the two-layer model.
pub const TWO_LAYER: (f64, f64, f64) = (0.4, 1.0, 1.5);

const SMOOTH_SAMPLES: usize = 4001;

/// Looks up a 1D model by name; all live on `[0, 1]` with `v(0) = 1`.
pub fn builtin_1d<T: Real>(name: &str) -> Result<VelocityModel<T>> {
    let lit = T::lit;
    match name {
        "constant" => VelocityModel::constant(T::one(), T::one(), Role::True),
        "two-layer" => {
            let (x, v1, v2) = TWO_LAYER;
            VelocityModel::new(
                vec![T::zero(), lit(x), lit(x)],
                vec![lit(v1), lit(v1), lit(v2)],
                T::one(),
                Role::True,
            )
        }
        "smooth-bump" => sampled(|x| 1.0 + 0.5 * gauss(x, 0.45, 0.08)),
        "three-feature" => {
            let smooth = |x: f64| 1.0 + 0.4 * gauss(x, 0.2, 0.04) - 0.25 * gauss(x, 0.42, 0.05);
            let mut xs: Vec<f64> = (0..SMOOTH_SAMPLES)
                .map(|i| 0.6 * i as f64 / (SMOOTH_SAMPLES - 1) as f64)
                .collect();
            let mut vs: Vec<f64> = xs.iter().map(|&x| smooth(x)).collect();
            // Discontinuous block on [0.6, 0.7].
            xs.extend([0.6, 0.7, 0.7]);
            vs.extend([1.5, 1.5, 1.0]);
            VelocityModel::new(
                xs.into_iter().map(lit).collect(),
                vs.into_iter().map(lit).collect(),
                T::one(),
                Role::True,
            )
        }
        other => Err(Error::invalid(
            "model",
            format!("unknown built-in '{other}'; choose one of {}", BUILTIN_1D.join(", ")),
        )),
    }
}

fn gauss(x: f64, c: f64, w: f64) -> f64 {
    (-((x - c) / w).powi(2)).exp()
}

fn sampled<T: Real>(f: impl Fn(f64) -> f64) -> Result<VelocityModel<T>> {
    let samples = (0..SMOOTH_SAMPLES)
        .map(|i| T::lit(f(i as f64 / (SMOOTH_SAMPLES - 1) as f64)))
        .collect();
    VelocityModel::from_samples(samples, T::one(), Role::True)
}
