//! Experiment configuration: `key=value` files with `#` comments, overridden by flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use waverom::forward1d::{check_no_return, Role, VelocityModel};
use waverom::mimo2d::{builtin_2d, default_ymax, VelocityField2D, DEFAULT_NX, DEFAULT_NY};
use waverom::models::{builtin_1d, BUILTIN_1D};
use waverom::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    OneD,
    TwoD,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::OneD => "1d",
            Mode::TwoD => "2d",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub model: String,
    pub sigma: f64,
    pub tau_over_sigma: f64,
    pub n: usize,
    pub m: usize,
    pub mode: Mode,
    pub output: PathBuf,
    pub sources: usize,
    pub aperture: f64,
    pub nx: usize,
    pub ny: usize,
    /// Half-width of the 2D domain; `None` means 4x the aperture.
    pub ymax: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: "two-layer".into(),
            sigma: 0.01,
            tau_over_sigma: 2.5,
            n: 25,
            m: waverom::forward1d::DEFAULT_NODES,
            mode: Mode::OneD,
            output: PathBuf::from("out"),
            sources: 9,
            aperture: 0.48,
            nx: DEFAULT_NX,
            ny: DEFAULT_NY,
            ymax: None,
        }
    }
}

/// Flag values; `None` means "not given on the command line".
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub sigma: Option<f64>,
    pub tau_over_sigma: Option<f64>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub mode: Option<String>,
    pub output: Option<PathBuf>,
    pub sources: Option<usize>,
    pub aperture: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub ymax: Option<f64>,
}

pub fn parse_kv(text: &str, path: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            msg: format!("line {}: expected key=value", lineno + 1),
        })?;
        out.insert(k.trim().replace('-', "_"), v.trim().to_owned());
    }
    Ok(out)
}

fn parse<V: std::str::FromStr>(key: &str, v: &str) -> Result<V> {
    v.parse()
        .map_err(|_| Error::invalid(key, format!("cannot parse '{v}'")))
}

fn parse_mode(v: &str) -> Result<Mode> {
    match v {
        "1d" => Ok(Mode::OneD),
        "2d" => Ok(Mode::TwoD),
        other => Err(Error::invalid("mode", format!("'{other}' is not 1d or 2d"))),
    }
}

impl ExperimentConfig {
    /// Defaults, then the config file, then flags.
    pub fn resolve(file: Option<&Path>, flags: Overrides) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            for (k, v) in parse_kv(&text, path)? {
                match k.as_str() {
                    "model" => c.model = v,
                    "sigma" => c.sigma = parse(&k, &v)?,
                    "tau_over_sigma" => c.tau_over_sigma = parse(&k, &v)?,
                    "n" => c.n = parse(&k, &v)?,
                    "m" => c.m = parse(&k, &v)?,
                    "mode" => c.mode = parse_mode(&v)?,
                    "output" => c.output = PathBuf::from(v),
                    "sources" => c.sources = parse(&k, &v)?,
                    "aperture" => c.aperture = parse(&k, &v)?,
                    "nx" => c.nx = parse(&k, &v)?,
                    "ny" => c.ny = parse(&k, &v)?,
                    "ymax" => c.ymax = Some(parse(&k, &v)?),
                    other => return Err(Error::invalid(other, "unknown configuration key")),
                }
            }
        }
        let Overrides {
            model,
            sigma,
            tau_over_sigma,
            n,
            m,
            mode,
            output,
            sources,
            aperture,
            nx,
            ny,
            ymax,
        } = flags;
        if let Some(v) = model {
            c.model = v;
        }
        if let Some(v) = mode {
            c.mode = parse_mode(&v)?;
        }
        c.sigma = sigma.unwrap_or(c.sigma);
        c.tau_over_sigma = tau_over_sigma.unwrap_or(c.tau_over_sigma);
        c.n = n.unwrap_or(c.n);
        c.m = m.unwrap_or(c.m);
        c.output = output.unwrap_or(c.output);
        c.sources = sources.unwrap_or(c.sources);
        c.aperture = aperture.unwrap_or(c.aperture);
        c.nx = nx.unwrap_or(c.nx);
        c.ny = ny.unwrap_or(c.ny);
        c.ymax = ymax.or(c.ymax);
        c.validate()?;
        Ok(c)
    }

    pub fn ymax(&self) -> f64 {
        self.ymax.unwrap_or_else(|| default_ymax(self.aperture))
    }

    pub fn tau(&self) -> f64 {
        self.tau_over_sigma * self.sigma
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma", "pulse width must be positive"));
        }
        if !(self.tau_over_sigma > 0.0 && self.tau_over_sigma.is_finite()) {
            return Err(Error::invalid(
                "tau_over_sigma",
                format!("must be positive; {}", waverom::error::TAU_GUIDANCE),
            ));
        }
        if self.n < 2 {
            return Err(Error::invalid("n", "need at least 2 snapshots (2n samples)"));
        }
        if self.mode == Mode::TwoD {
            if self.sources == 0 {
                return Err(Error::invalid("sources", "need at least one source"));
            }
            let ymax = self.ymax();
            if !(ymax > 0.5 * self.aperture && ymax.is_finite()) {
                return Err(Error::invalid("ymax", "must exceed half the aperture"));
            }
        }
        Ok(())
    }

    /// Provenance lines shared by every output of this configuration.
    pub fn provenance(&self, model_hash: &str) -> Vec<(String, String)> {
        let mut p = vec![
            ("model".to_owned(), self.model.clone()),
            ("model_sha256".to_owned(), model_hash.to_owned()),
            ("mode".to_owned(), self.mode.as_str().to_owned()),
            ("sigma".to_owned(), self.sigma.to_string()),
            ("tau_over_sigma".to_owned(), self.tau_over_sigma.to_string()),
            ("tau".to_owned(), self.tau().to_string()),
            ("n".to_owned(), self.n.to_string()),
        ];
        match self.mode {
            Mode::OneD => p.push(("m".into(), self.m.to_string())),
            Mode::TwoD => {
                p.push(("nx".into(), self.nx.to_string()));
                p.push(("ny".into(), self.ny.to_string()));
                p.push(("sources".into(), self.sources.to_string()));
                p.push(("aperture".into(), self.aperture.to_string()));
            }
        }
        p
    }
}

fn hash_numbers<'a>(parts: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut h = Sha256::new();
    for part in parts {
        for x in part {
            h.update(x.to_le_bytes());
        }
    }
    format!("{:x}", h.finalize())
}

/// Built-in name or path to a `x,v` knot file.
pub fn load_model(spec: &str, role: Role) -> Result<VelocityModel<f64>> {
    if BUILTIN_1D.contains(&spec) {
        Ok(builtin_1d::<f64>(spec)?.with_role(role))
    } else if Path::new(spec).exists() {
        VelocityModel::read(Path::new(spec), role)
    } else {
        Err(Error::invalid(
            "model",
            format!("'{spec}' is neither a file nor a built-in ({})", BUILTIN_1D.join(", ")),
        ))
    }
}

pub fn model_hash(model: &VelocityModel<f64>) -> String {
    let (xs, vs) = model.knots();
    hash_numbers([xs, vs, &[model.xmax()][..]])
}

pub fn load_field(spec: &str, nx: usize, ny: usize, ymax: f64) -> Result<VelocityField2D<f64>> {
    if waverom::mimo2d::BUILTIN_2D.contains(&spec) {
        builtin_2d(spec, nx, ny, ymax)
    } else if Path::new(spec).exists() {
        VelocityField2D::read(Path::new(spec))
    } else {
        Err(Error::invalid(
            "model",
            format!(
                "'{spec}' is neither a file nor a 2D built-in ({})",
                waverom::mimo2d::BUILTIN_2D.join(", ")
            ),
        ))
    }
}

pub fn field_hash(field: &VelocityField2D<f64>) -> String {
    let dims = [field.nx() as f64, field.ny() as f64, field.xmax(), field.ymax()];
    hash_numbers([&dims[..], field.values()])
}

/// The slowest row bounds how long the window may stay open.
pub fn check_field_window(field: &VelocityField2D<f64>, tau: f64, count: usize) -> Result<()> {
    for i in 0..field.ny() {
        check_no_return(&field.row(i)?, tau, count)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_are_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "# comment\nsigma = 0.02\nn=10 # trailing\nmode=2d\n").unwrap();
        let c = ExperimentConfig::resolve(
            Some(&path),
            Overrides {
                n: Some(12),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(c.sigma, 0.02);
        assert_eq!(c.n, 12);
        assert_eq!(c.mode, Mode::TwoD);
    }

    #[test]
    fn bad_keys_and_values_name_the_parameter() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "speed=3\n").unwrap();
        let e = ExperimentConfig::resolve(Some(&path), Overrides::default()).unwrap_err();
        assert!(e.to_string().contains("speed"));
        let e = ExperimentConfig::resolve(
            None,
            Overrides {
                tau_over_sigma: Some(-1.0),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(e.to_string().contains("tau_over_sigma"));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn hash_depends_on_the_model() {
        let a = model_hash(&load_model("two-layer", Role::True).unwrap());
        let b = model_hash(&load_model("constant", Role::True).unwrap());
        assert_ne!(a, b);
        assert_eq!(a.len(), 64);
    }
}
