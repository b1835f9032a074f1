use super::*;
use crate::models::builtin_1d;
use proptest::prelude::*;
use std::f64::consts::PI;

fn gauss_density(x: f64, std: f64) -> f64 {
    (-x * x / (2.0 * std * std)).exp() / (std * (2.0 * PI).sqrt())
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn grid_examples() {
    let g = StaggeredGrid::<f64>::uniform(4, 1.0).unwrap();
    assert_eq!(g.h(), 0.25);
    assert_eq!(g.dual_steps()[0], 0.125);
    assert_eq!(g.dual_steps()[1], 0.25);
    assert_eq!(g.primary_nodes(), &[0.0, 0.25, 0.5, 0.75]);

    let g2 = StaggeredGrid::<f64>::uniform(4, 2.0).unwrap();
    for (a, b) in g.primary_nodes().iter().zip(g2.primary_nodes()) {
        assert_eq!(2.0 * a, *b);
    }
    for (a, b) in g.dual_nodes().iter().zip(g2.dual_nodes()) {
        assert_eq!(2.0 * a, *b);
    }

    let g = StaggeredGrid::<f64>::uniform(1000, 1.0).unwrap();
    assert_eq!(g.primary_nodes().len(), 1000);
    assert_eq!(g.dual_nodes().len(), 1000);
    for j in 0..1000 {
        assert!(g.primary_nodes()[j] < g.dual_nodes()[j]);
        if j + 1 < 1000 {
            assert!(g.dual_nodes()[j] < g.primary_nodes()[j + 1]);
        }
    }
    assert!(StaggeredGrid::<f64>::uniform(3, 1.0).is_err());
    assert!(StaggeredGrid::<f64>::uniform(10, 0.0).is_err());
}

#[test]
fn model_integrals_match_quadrature() {
    let m = VelocityModel::new(vec![0.0, 0.3, 0.5, 0.5, 1.0], vec![1.0, 1.4, 1.2, 2.0, 1.7], 1.0, Role::True).unwrap();
    for &(a, b) in &[(0.0, 0.3), (0.1, 0.45), (0.2, 0.9), (0.55, 1.3)] {
        // Split at the jump so Simpson sees a smooth integrand.
        let split = |f: &dyn Fn(f64) -> f64| {
            if a < 0.5 && b > 0.5 {
                simpson(f, a, 0.5 - 1e-15, 20000) + simpson(f, 0.5, b, 20000)
            } else {
                simpson(f, a, b, 20000)
            }
        };
        let inv_sq = split(&|x| m.speed(x).powi(-2));
        let slow = split(&|x| 1.0 / m.speed(x));
        assert!((m.inv_sq_integral(a, b) - inv_sq).abs() < 1e-9, "{a} {b}");
        assert!((m.slowness_integral(a, b) - slow).abs() < 1e-9, "{a} {b}");
    }
    assert_eq!(m.speed(0.5), 2.0);
    assert!((m.speed(0.4999999) - 1.2).abs() < 1e-5);
}

#[test]
fn inverse_traveltime_round_trip() {
    let m = builtin_1d::<f64>("three-feature").unwrap();
    for i in 0..=50 {
        let x = i as f64 * 0.024;
        let t = m.traveltime(x);
        assert!((m.inverse_traveltime(t) - x).abs() < 1e-10, "x = {x}");
    }
    let c = VelocityModel::<f64>::constant(2.0, 1.0, Role::Reference).unwrap();
    assert!((c.traveltime(0.6) - 0.3).abs() < 1e-15);
    assert!((c.inverse_traveltime(0.3) - 0.6).abs() < 1e-15);
}

#[test]
fn model_rejects_bad_input() {
    assert!(VelocityModel::new(vec![0.0, 1.0], vec![1.0, 0.0], 1.0, Role::True).is_err());
    assert!(VelocityModel::new(vec![0.1, 1.0], vec![1.0, 1.0], 1.0, Role::True).is_err());
    assert!(VelocityModel::new(vec![0.0, 0.5, 0.4], vec![1.0, 1.0, 1.0], 1.0, Role::True).is_err());
    assert!(VelocityModel::constant(1.0, -1.0, Role::True).is_err());
}

fn unit(m: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[j] = 1.0;
    e
}

#[test]
fn constant_speed_reduces_to_laplacian_stencil() {
    let m = 8;
    let model = VelocityModel::constant(1.0, 1.0, Role::True).unwrap();
    let op = discretize(&model, m).unwrap();
    let h: f64 = 1.0 / m as f64;
    for j in 0..m {
        let col = op.matvec(&unit(m, j));
        for i in 0..m {
            let want = match (i, j) {
                (0, 0) => 2.0 / (h * h),
                (0, 1) => -2.0 / (h * h),
                (i, j) if i == j => 2.0 / (h * h),
                (i, j) if i.abs_diff(j) == 1 => -1.0 / (h * h),
                _ => 0.0,
            };
            assert!((col[i] - want).abs() < 1e-9, "A[{i},{j}] = {} vs {want}", col[i]);
        }
    }

    let op2 = discretize(&VelocityModel::constant(2.0, 1.0, Role::True).unwrap(), m).unwrap();
    for j in 0..m {
        let a = op.matvec(&unit(m, j));
        let b = op2.matvec(&unit(m, j));
        for i in 0..m {
            assert!((b[i] - 4.0 * a[i]).abs() < 1e-9);
        }
    }
}

#[test]
fn modal_functions_agree_with_stencil() {
    let op = discretize(&builtin_1d::<f64>("two-layer").unwrap(), 700).unwrap();
    let x: Vec<f64> = (0..700).map(|i| ((i as f64) * 0.013).sin()).collect();
    let a = op.matvec(&x);
    let b = op.apply_fn(|l| l, &x);
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (u, v) in a.iter().zip(&b) {
        assert!((u - v).abs() < 1e-9 * scale);
    }
    let back = op.from_modal(&op.to_modal(&x));
    for (u, v) in back.iter().zip(&x) {
        assert!((u - v).abs() < 1e-10);
    }
    assert!(op.eigenvalues()[0] > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_operator_is_self_adjoint(
        speeds in prop::collection::vec(0.5f64..3.0, 2..6),
        seed in any::<u64>(),
    ) {
        let k = speeds.len();
        let xs: Vec<f64> = (0..k).map(|i| i as f64 / k as f64).collect();
        let model = VelocityModel::new(xs, speeds, 1.0, Role::True).unwrap();
        let op = discretize(&model, 64).unwrap();
        let mut s = seed | 1;
        let mut rnd = || { s ^= s << 13; s ^= s >> 7; s ^= s << 17; (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5 };
        let u: Vec<f64> = (0..64).map(|_| rnd()).collect();
        let w: Vec<f64> = (0..64).map(|_| rnd()).collect();
        let lhs = op.inner(&op.matvec(&u), &w);
        let rhs = op.inner(&u, &op.matvec(&w));
        let norm = op.symmetrized().norm1();
        let nu = op.inner(&u, &u).sqrt();
        let nw = op.inner(&w, &w).sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * norm * nu * nw);
        prop_assert!(op.eigenvalues()[0] > 0.0);
    }
}

#[test]
fn source_vector_limits() {
    let model = VelocityModel::<f64>::constant(1.0, 1.0, Role::True).unwrap();
    let op = discretize(&model, 400).unwrap();
    let b = source_vector(&op, 1e-9).unwrap();
    let d = op.delta();
    for (u, v) in b.iter().zip(&d) {
        assert!((u - v).abs() < 1e-8 * d[0]);
    }
    assert!(source_vector(&op, 0.0).is_err());
}

#[test]
fn source_vector_is_half_line_gaussian() {
    let sigma = 0.01;
    let op = discretize(&VelocityModel::constant(1.0, 1.0, Role::True).unwrap(), 2000).unwrap();
    let b = source_vector(&op, sigma).unwrap();
    // exp(−σ²A/4) is the heat kernel of variance σ²/2; the Neumann image doubles it.
    let std = sigma / 2f64.sqrt();
    let peak = 2.0 * gauss_density(0.0, std);
    for (j, &x) in op.grid().primary_nodes().iter().enumerate().take(200) {
        let want = 2.0 * gauss_density(x, std);
        assert!((b[j] - want).abs() < 1e-2 * peak, "node {j}: {} vs {want}", b[j]);
    }
    let mass: f64 = b.iter().zip(op.grid().dual_steps()).map(|(v, h)| v * h).sum();
    assert!((mass - 1.0).abs() < 1e-6);
}

#[test]
fn snapshots_satisfy_time_identities() {
    let sigma = 0.01;
    let tau = 2.5 * sigma;
    let op = discretize(&builtin_1d::<f64>("two-layer").unwrap(), 2000).unwrap();
    let b = source_vector(&op, sigma).unwrap();
    let snaps = propagate_snapshots(&op, &b, tau, 12).unwrap();
    for (u, v) in snaps.primary[0].iter().zip(&b) {
        assert!((u - v).abs() <= 1e-12 * b[0], "{} {}", u, v);
    }
    let norm = |x: &[f64]| op.inner(x, x).sqrt();
    let s = |l: f64| half_sine(tau, l);
    for k in 1..11 {
        let (um, u, up) = (&snaps.primary[k - 1], &snaps.primary[k], &snaps.primary[k + 1]);
        // Chebyshev three-term recursion u_{k+1} = 2 P u_k − u_{k−1}.
        let pu = op.apply_fn(|l| (tau * l.sqrt()).cos(), u);
        let r: Vec<f64> = (0..u.len()).map(|i| up[i] - 2.0 * pu[i] + um[i]).collect();
        assert!(norm(&r) <= 1e-9 * norm(u).max(norm(up)));
        // Second difference equals τ² ξ(P) u_k with ξ(x) = −(2/τ²)(1 − x).
        let xi: Vec<f64> = (0..u.len()).map(|i| -2.0 * (u[i] - pu[i])).collect();
        let d2: Vec<f64> = (0..u.len()).map(|i| up[i] - 2.0 * u[i] + um[i]).collect();
        let r: Vec<f64> = d2.iter().zip(&xi).map(|(a, b)| a - b).collect();
        assert!(norm(&r) <= 1e-9 * norm(u).max(norm(up)));
    }
    // Leapfrog: w_k = w_{k−1} + 2 KG s(A) u_k,  u_{k+1} = u_k − 2 s(A) W⁻¹Gᵀ w_k.
    let dual_norm = |x: &[f64]| op.dual_inner(x, x).sqrt();
    for k in 0..11 {
        let prev: Vec<f64> = if k == 0 {
            snaps.dual[0].iter().map(|v| -v).collect()
        } else {
            snaps.dual[k - 1].clone()
        };
        let step = op.flux(&op.apply_fn(s, &snaps.primary[k]));
        let r: Vec<f64> = (0..prev.len()).map(|i| snaps.dual[k][i] - prev[i] - 2.0 * step[i]).collect();
        assert!(dual_norm(&r) <= 1e-8 * dual_norm(&snaps.dual[k]));
        let back = op.apply_fn(s, &op.flux_adjoint(&snaps.dual[k]));
        let r: Vec<f64> = (0..back.len())
            .map(|i| snaps.primary[k + 1][i] - snaps.primary[k][i] + 2.0 * back[i])
            .collect();
        assert!(norm(&r) <= 1e-8 * norm(&snaps.primary[k]));
    }
}

#[test]
fn constant_medium_pulse_travels_at_unit_speed() {
    let sigma = 0.01;
    let tau = 2.5 * sigma;
    let op = discretize(&VelocityModel::<f64>::constant(1.0, 1.0, Role::True).unwrap(), 2000).unwrap();
    let b = source_vector(&op, sigma).unwrap();
    let snaps = propagate_snapshots(&op, &b, tau, 30).unwrap();
    let h = op.grid().h();
    for k in 2..30 {
        let u = &snaps.primary[k];
        let peak = (0..u.len()).max_by(|&i, &j| u[i].total_cmp(&u[j])).unwrap();
        let x = op.grid().primary_nodes()[peak];
        assert!((x - k as f64 * tau).abs() <= h + 1e-12, "k = {k}: peak at {x}");
    }
}

#[test]
fn transfer_series_matches_autocorrelation_before_reflection() {
    let sigma = 0.01;
    let tau = 0.5 * sigma;
    let op = discretize(&VelocityModel::constant(1.0, 1.0, Role::True).unwrap(), 2000).unwrap();
    let f = synthesize(&op, sigma, tau, 40).unwrap();
    // Pulse autocorrelation: Gaussian in t with standard deviation σ, doubled by the image.
    let f0 = 2.0 * gauss_density(0.0, sigma);
    for (k, &v) in f.values().iter().enumerate() {
        let want = 2.0 * gauss_density(k as f64 * tau, sigma);
        assert!((v - want).abs() < 1e-2 * f0, "k = {k}: {v} vs {want}");
    }
    assert!(f.values()[0] > 0.0);
}

#[test]
fn explicit_and_modal_transfer_agree() {
    let sigma = 0.01;
    let tau = 2.5 * sigma;
    let op = discretize(&builtin_1d::<f64>("two-layer").unwrap(), 2000).unwrap();
    let b = source_vector(&op, sigma).unwrap();
    let snaps = propagate_snapshots(&op, &b, tau, 20).unwrap();
    let direct = measure_transfer(&snaps, &b, op.weights(), sigma).unwrap();
    let fast = synthesize(&op, sigma, tau, 20).unwrap();
    for (a, c) in direct.values().iter().zip(fast.values()) {
        assert!((a - c).abs() < 1e-10 * fast.mass());
    }
    assert!((direct.values()[0] - op.inner(&b, &b)).abs() < 1e-12 * fast.mass());
    // Even extension to negative k.
    assert_eq!(fast.at(-3), fast.at(3));
}

#[test]
fn transfer_converges_at_second_order() {
    let sigma = 0.05;
    let tau = sigma;
    let model = builtin_1d::<f64>("smooth-bump").unwrap();
    let series: Vec<Vec<f64>> = [100, 200, 400]
        .iter()
        .map(|&m| synthesize(&discretize(&model, m).unwrap(), sigma, tau, 20).unwrap().values().to_vec())
        .collect();
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let ratio = diff(&series[0], &series[1]) / diff(&series[1], &series[2]);
    assert!((3.0..5.5).contains(&ratio), "refinement ratio {ratio}");
}

#[test]
fn no_return_check() {
    let model = builtin_1d::<f64>("two-layer").unwrap();
    assert!(check_no_return(&model, 0.025, 50).is_ok());
    assert!(check_no_return(&model, 0.035, 50).is_err());
    assert!(check_no_return(&model, 0.035, 46).is_ok());
}

#[test]
fn transfer_series_validation() {
    assert!(TransferSeries::new(0.1, 0.1, vec![1.0, 0.5]).is_ok());
    assert!(TransferSeries::new(0.1, 0.1, vec![1.0, 0.5, 0.2]).is_err());
    assert!(TransferSeries::new(0.1, 0.1, vec![-1.0, 0.5]).is_err());
    assert!(TransferSeries::new(0.0, 0.1, vec![1.0, 0.5]).is_err());
}
