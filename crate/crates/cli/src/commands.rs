use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use waverom::error::TAU_GUIDANCE;
use waverom::forward1d::{
    check_no_return, discretize, propagate_snapshots, source_vector, synthesize, Role, TransferSeries, VelocityModel,
};
use waverom::gammas::orthogonalize_reference;
use waverom::invert1d::{compare_centers_of_mass, default_reference, invert, InversionResult, InvertConfig};
use waverom::io::{self, Provenance};
use waverom::linalg::Matrix;
use waverom::mimo2d::{forward2d, invert2d, source_array, Invert2dConfig, default_ymax, DEFAULT_APERTURE, DEFAULT_XMAX};
use waverom::romdata::{assemble_gram, gram_condition, lanczos_jacobi, spectral_measure};
use waverom::{Error, Result};

use crate::config::{self, ExperimentConfig, Mode};

/// Condition numbers above this trigger a warning even when the pipeline succeeds.
pub const COND_WARN: f64 = 1e8;

const RUN_FILE: &str = "run.cfg";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn prov(pairs: &[(&str, String)]) -> Provenance {
    pairs.iter().map(|(k, v)| ((*k).to_owned(), v.clone())).collect()
}

fn lookup<'a>(p: &'a Provenance, key: &str) -> Option<&'a str> {
    p.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn f(x: f64) -> String {
    x.to_string()
}

/// Writes the synthetic data for `cfg` and returns the path of the main artifact.
pub fn synthesize_cmd(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let tau = cfg.tau();
    let count = 2 * cfg.n;
    match cfg.mode {
        Mode::OneD => {
            let model = config::load_model(&cfg.model, Role::True)?;
            check_no_return(&model, tau, count)?;
            let op = discretize(&model, cfg.m)?;
            let data = synthesize(&op, cfg.sigma, tau, count)?;
            let mut p = cfg.provenance(&config::model_hash(&model));
            p.push(("xmax".into(), f(model.xmax())));
            let path = cfg.output.join("data.csv");
            io::write_transfer(&path, &data, &p)?;
            Ok(path)
        }
        Mode::TwoD => {
            let field = config::load_field(&cfg.model, cfg.nx, cfg.ny, cfg.ymax())?;
            config::check_field_window(&field, tau, count)?;
            let sources = source_array(cfg.sources, cfg.aperture);
            let data = forward2d(&field, &sources, cfg.sigma, tau, count)?;
            let mut p = cfg.provenance(&config::field_hash(&field));
            p.push(("xmax".into(), f(field.xmax())));
            p.push(("ymax".into(), f(field.ymax())));
            p.push(("v0".into(), f(field.source_line_speed()?)));
            io::write_block_series(&cfg.output.join("data"), &data, &p)
        }
    }
}

#[derive(Clone, Debug)]
pub struct InvertArgs {
    pub data: PathBuf,
    pub reference: Option<String>,
    pub v0: f64,
    pub xmax: Option<f64>,
    pub m: usize,
    pub n: Option<usize>,
    pub output: PathBuf,
}

fn reference_model(args: &InvertArgs, data_prov: &Provenance) -> Result<VelocityModel<f64>> {
    match &args.reference {
        Some(spec) => config::load_model(spec, Role::Reference),
        None => {
            let xmax = match args.xmax {
                Some(x) => x,
                None => lookup(data_prov, "xmax").and_then(|s| s.parse().ok()).unwrap_or(1.0),
            };
            default_reference(args.v0, xmax)
        }
    }
}

fn warn_diagnostics(r: &InversionResult<f64>) {
    let d = &r.diagnostics;
    if d.cond_uu >= COND_WARN {
        eprintln!(
            "warning: cond(U*U) = {:.3e} at tau = {} (tau/sigma = {:.3}); results are unreliable. {TAU_GUIDANCE}",
            d.cond_uu,
            d.tau,
            d.tau / d.sigma
        );
    }
    if !d.monotone {
        eprintln!("warning: reference centers of mass are not interlaced; the node grid is not monotone");
    }
    if d.origin_mismatch > 1e-3 {
        eprintln!(
            "warning: first data and reference coefficients differ by {:.2e}; \
             the reference speed at x = 0 probably does not match the data (see --v0)",
            d.origin_mismatch
        );
    }
}

pub fn invert_cmd(args: &InvertArgs) -> Result<InversionResult<f64>> {
    let data: TransferSeries<f64> = io::read_transfer(&args.data)?;
    let data_prov = io::read_provenance(&args.data)?;
    let reference = reference_model(args, &data_prov)?;
    let result = invert(&data, &reference, &InvertConfig { m: args.m, n: args.n }).map_err(|e| {
        if let Error::IllConditioned { .. } = e {
            if let Ok(c) = gram_condition(&data) {
                eprintln!("cond(U*U) = {c:.3e} at tau/sigma = {:.3}", data.tau() / data.sigma());
            }
        }
        e
    })?;
    warn_diagnostics(&result);

    let mut p = prov(&[
        ("data", args.data.display().to_string()),
        ("reference", args.reference.clone().unwrap_or_else(|| format!("constant:{}", args.v0))),
        ("reference_sha256", config::model_hash(&reference)),
        ("m", args.m.to_string()),
    ]);
    if let Some(h) = lookup(&data_prov, "model_sha256") {
        p.push(("data_model_sha256".into(), h.to_owned()));
    }
    let out = &args.output;
    io::write_inversion(&out.join("inversion.csv"), &result, &p)?;
    io::write_gammas(&out.join("gammas_data.csv"), &result.data_gammas, &p)?;
    io::write_gammas(&out.join("gammas_reference.csv"), &result.reference_gammas, &p)?;
    io::write_diagnostics(&out.join("diagnostics.csv"), &result.diagnostics, &p)?;

    // Everything plot-data needs to rebuild the panels.
    let mut run = vec![
        format!("data={}", args.data.display()),
        format!("m={}", args.m),
        format!("n={}", result.diagnostics.n),
    ];
    if let Some(r) = &args.reference {
        run.push(format!("reference={r}"));
    }
    run.push(format!("v0={}", args.v0));
    run.push(format!("xmax={}", reference.xmax()));
    if let Some(model) = lookup(&data_prov, "model") {
        run.push(format!("truth={model}"));
    }
    run.push(String::new());
    let run_path = out.join(RUN_FILE);
    fs::write(&run_path, run.join("\n")).map_err(io_err(&run_path))?;
    Ok(result)
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub tau_over_sigma: f64,
    pub tau: f64,
    pub cond_uu: f64,
    pub residual: f64,
    pub monotone: Option<bool>,
    pub error: Option<f64>,
    pub status: String,
}

fn sweep_entry(
    truth: &VelocityModel<f64>,
    op: &waverom::forward1d::DiscreteOperator<f64>,
    sigma: f64,
    ratio: f64,
    n: usize,
    m: usize,
    with_truth: bool,
) -> SweepRow {
    let tau = ratio * sigma;
    let mut row = SweepRow {
        tau_over_sigma: ratio,
        tau,
        cond_uu: f64::NAN,
        residual: f64::NAN,
        monotone: None,
        error: None,
        status: "ok".into(),
    };
    let mut run = || -> Result<()> {
        check_no_return(truth, tau, 2 * n)?;
        let data = synthesize(op, sigma, tau, 2 * n)?;
        row.cond_uu = gram_condition(&data)?;
        let rom = lanczos_jacobi(&spectral_measure(&assemble_gram(&data)?)?)?;
        let f0 = data.values()[0].abs();
        row.residual = rom
            .transfer(2 * n)
            .iter()
            .zip(data.values())
            .map(|(a, b)| (a - b).abs() / f0)
            .fold(0.0, f64::max);
        let v0 = default_reference(truth.origin_speed(), truth.xmax())?;
        let r = invert(&data, &v0, &InvertConfig { m, n: None })?;
        row.monotone = Some(r.diagnostics.monotone);
        if with_truth {
            let est = r.estimates.primary.iter().zip(&r.physical.primary);
            let dual = r.estimates.dual.iter().zip(&r.physical.dual);
            row.error = Some(
                est.chain(dual)
                    .map(|(&v, &x)| {
                        let t = truth.speed(x);
                        (v - t).abs() / t
                    })
                    .fold(0.0, f64::max),
            );
        }
        Ok(())
    };
    if let Err(e) = run() {
        row.status = e.to_string();
    }
    row
}

pub struct SweepArgs {
    pub model: String,
    pub sigma: f64,
    pub taus: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub workers: usize,
    pub with_truth: bool,
    pub output: Option<PathBuf>,
}

/// One row per `τ/σ`; failures are recorded in the `status` column instead of aborting.
pub fn tau_sweep_cmd(args: &SweepArgs) -> Result<Vec<SweepRow>> {
    if args.taus.is_empty() {
        return Err(Error::invalid("taus", format!("need at least one tau/sigma value; {TAU_GUIDANCE}")));
    }
    if let Some(bad) = args.taus.iter().find(|t| t.is_nan() || **t <= 0.0) {
        return Err(Error::invalid("taus", format!("tau/sigma = {bad} is not positive")));
    }
    if args.n < 2 {
        return Err(Error::invalid("n", "need at least 2 snapshots"));
    }
    let truth = config::load_model(&args.model, Role::True)?;
    let op = discretize(&truth, args.m)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.max(1))
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        args.taus
            .par_iter()
            .map(|&r| sweep_entry(&truth, &op, args.sigma, r, args.n, args.m, args.with_truth))
            .collect()
    });
    if let Some(path) = &args.output {
        let p = prov(&[
            ("model", args.model.clone()),
            ("model_sha256", config::model_hash(&truth)),
            ("sigma", f(args.sigma)),
            ("n", args.n.to_string()),
            ("m", args.m.to_string()),
        ]);
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    f(r.tau_over_sigma),
                    f(r.tau),
                    f(r.cond_uu),
                    f(r.residual),
                    r.monotone.map(|b| b.to_string()).unwrap_or_default(),
                    r.error.map(f).unwrap_or_default(),
                    r.status.clone(),
                ]
            })
            .collect();
        io::write_table(
            path,
            &p,
            &["tau_over_sigma", "tau", "cond_uu", "max_interp_residual", "monotone", "recon_error", "status"],
            &table,
        )?;
    }
    Ok(rows)
}

fn columns_matrix(cols: &[Vec<f64>]) -> Matrix<f64> {
    let rows = cols.first().map_or(0, Vec::len);
    Matrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

fn names(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|k| format!("{prefix}{k}")).collect()
}

/// Rebuilds plot panels from an `invert` output directory. Returns the files written.
pub fn plot_data_cmd(results: &Path, output: &Path) -> Result<Vec<PathBuf>> {
    let run_path = results.join(RUN_FILE);
    let inv_path = results.join("inversion.csv");
    if !results.is_dir() || !run_path.exists() || !inv_path.exists() {
        return Err(Error::invalid(
            "results",
            format!(
                "{} holds no inversion output ({RUN_FILE} and inversion.csv); run `waverom invert` first",
                results.display()
            ),
        ));
    }
    let text = fs::read_to_string(&run_path).map_err(io_err(&run_path))?;
    let run = config::parse_kv(&text, &run_path)?;
    let get = |k: &str| {
        run.get(k)
            .ok_or_else(|| Error::Parse {
                path: run_path.clone(),
                msg: format!("missing key {k}"),
            })
            .map(String::as_str)
    };
    let num = |k: &str| -> Result<f64> {
        get(k)?.parse().map_err(|_| Error::Parse {
            path: run_path.clone(),
            msg: format!("{k} is not a number"),
        })
    };
    let data: TransferSeries<f64> = io::read_transfer(Path::new(get("data")?))?;
    let (m, n) = (num("m")? as usize, num("n")? as usize);
    let reference = match run.get("reference") {
        Some(spec) => config::load_model(spec, Role::Reference)?,
        None => default_reference(num("v0")?, num("xmax")?)?,
    };
    let truth = match run.get("truth") {
        Some(name) => Some(config::load_model(name, Role::True)?),
        None => None,
    };
    let (sigma, tau) = (data.sigma(), data.tau());
    let p = prov(&[("results", results.display().to_string()), ("sigma", f(sigma)), ("tau", f(tau))]);
    let mut written = Vec::new();

    // Snapshots of the medium that produced the data (or the reference if unknown).
    let medium = truth.as_ref().unwrap_or(&reference);
    let op = discretize(medium, m)?;
    let b = source_vector(&op, sigma)?;
    let snaps = propagate_snapshots(&op, &b, tau, n)?;
    let path = output.join("snapshots.csv");
    io::write_matrix(&path, &columns_matrix(&snaps.primary), &names("u_", n), &p)?;
    written.push(path);
    let path = output.join("grid.csv");
    let xs: Vec<Vec<String>> = op.grid().primary_nodes().iter().map(|&x| vec![f(x)]).collect();
    io::write_table(&path, &p, &["x"], &xs)?;
    written.push(path);

    let rop = discretize(&reference, m)?;
    let rb = source_vector(&rop, sigma)?;
    let ortho = orthogonalize_reference(&rop, &rb, tau, n)?;
    let path = output.join("ortho_primary.csv");
    io::write_matrix(&path, &columns_matrix(&ortho.primary), &names("u_hat_", n), &p)?;
    written.push(path);
    let path = output.join("ortho_dual.csv");
    io::write_matrix(&path, &columns_matrix(&ortho.dual), &names("w_", n), &p)?;
    written.push(path);

    let nodes = io::read_inversion(&inv_path)?;
    let path = output.join("node_estimates.csv");
    let rows: Vec<Vec<String>> = nodes
        .iter()
        .map(|(kind, t, x, v)| {
            let mut r = vec![kind.clone(), f(*t), f(*x), f(*v)];
            if let Some(tr) = &truth {
                r.push(f(tr.speed(*x)));
            }
            r
        })
        .collect();
    let mut header = vec!["node_type", "traveltime_pos", "physical_pos", "v_estimate"];
    if truth.is_some() {
        header.push("v_true");
    }
    io::write_table(&path, &p, &header, &rows)?;
    written.push(path);

    match &truth {
        Some(tr) => {
            let result = invert(&data, &reference, &InvertConfig { m, n: Some(n) })?;
            let com = compare_centers_of_mass(tr, m, &result)?;
            let rows: Vec<Vec<String>> = (0..n)
                .map(|j| {
                    vec![
                        (j + 1).to_string(),
                        f(com.true_physical[j]),
                        f(com.reference_mapped[j]),
                        f(com.approx_physical[j]),
                    ]
                })
                .collect();
            let path = output.join("centers_of_mass.csv");
            io::write_table(&path, &p, &["j", "true", "reference", "approximated_physical"], &rows)?;
            written.push(path);
        }
        None => eprintln!("note: the data carry no model name; skipping the centers-of-mass panel"),
    }
    Ok(written)
}

pub struct Invert2dArgs {
    pub data: PathBuf,
    pub v0: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub xmax: Option<f64>,
    pub ymax: Option<f64>,
    pub reference_nodes: usize,
    pub output: PathBuf,
}

pub fn invert2d_cmd(args: &Invert2dArgs) -> Result<PathBuf> {
    let data = io::read_block_series::<f64>(&args.data)?;
    let manifest = args.data.join("manifest.csv");
    let dp = io::read_provenance(&manifest)?;
    let from = |k: &str| lookup(&dp, k).and_then(|s| s.parse::<f64>().ok());
    let defaults = Invert2dConfig::<f64>::default();
    let config = Invert2dConfig {
        nx: args.nx.or(from("nx").map(|x| x as usize)).unwrap_or(defaults.nx),
        ny: args.ny.or(from("ny").map(|x| x as usize)).unwrap_or(defaults.ny),
        xmax: args.xmax.or(from("xmax")).unwrap_or(DEFAULT_XMAX),
        ymax: args.ymax.or(from("ymax")).unwrap_or_else(|| default_ymax(DEFAULT_APERTURE)),
        reference_nodes: args.reference_nodes,
    };
    let v0 = args.v0.or(from("v0")).unwrap_or(1.0);
    let r = invert2d(&data, v0, &config)?;
    if r.cond_uu >= COND_WARN {
        eprintln!("warning: cond(U*U) = {:.3e}; {TAU_GUIDANCE}", r.cond_uu);
    }
    let p = prov(&[
        ("data", args.data.display().to_string()),
        ("v0", f(v0)),
        ("nx", config.nx.to_string()),
        ("ny", config.ny.to_string()),
        ("cond_uu", f(r.cond_uu)),
    ]);
    let path = args.output.join("inversion2d.csv");
    io::write_inversion2d(&path, &r, &p)?;
    Ok(path)
}

/// Gram matrices, spectral measure and Jacobi matrix of a data file, for debugging.
pub fn rom_cmd(data: &Path, output: &Path) -> Result<Vec<PathBuf>> {
    let series: TransferSeries<f64> = io::read_transfer(data)?;
    let gram = assemble_gram(&series)?;
    let meas = spectral_measure(&gram)?;
    let rom = lanczos_jacobi(&meas)?;
    let p = prov(&[("data", data.display().to_string()), ("cond_uu", f(gram.cond_uu))]);
    let paths = [output.join("gram.csv"), output.join("measure.csv"), output.join("jacobi.csv")];
    io::write_gram(&paths[0], &gram, &p)?;
    let rows: Vec<Vec<String>> = meas
        .nodes
        .iter()
        .zip(&meas.weights)
        .enumerate()
        .map(|(i, (&t, &w))| vec![(i + 1).to_string(), f(t), f(w)])
        .collect();
    io::write_table(&paths[1], &p, &["i", "theta", "weight"], &rows)?;
    io::write_jacobi(&paths[2], &rom, &p)?;
    Ok(paths.to_vec())
}
