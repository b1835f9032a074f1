use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::forward1d::{Role, VelocityModel};
use crate::real::Real;

/// Built-in 2D fields.
pub const BUILTIN_2D: [&str; 3] = ["constant", "block", "dipping-interface"];

/// Default sampling of the built-in 2D fields.
pub const DEFAULT_NX: usize = 200;
pub const DEFAULT_NY: usize = 120;
pub const DEFAULT_XMAX: f64 = 1.0;
/// Width of the default source array on `x = 0`.
pub const DEFAULT_APERTURE: f64 = 0.2;
/// Lateral half-width as a multiple of the source aperture.
pub const YMAX_PER_APERTURE: f64 = 4.0;

/// Lateral half-width that keeps the side walls far from the source array.
pub fn default_ymax<T: Real>(aperture: T) -> T {
    T::lit(YMAX_PER_APERTURE) * aperture
}

/// Speed sampled on a uniform grid over `[0, xmax] × [−ymax, ymax]`.
///
/// Sample `(j, i)` sits at `x_j = j·xmax/(nx−1)`, `y_i = −ymax + i·2ymax/(ny−1)` and is
/// stored at `values[i·nx + j]`. Between samples the speed is piecewise linear in `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField2D<T> {
    nx: usize,
    ny: usize,
    xmax: T,
    ymax: T,
    values: Vec<T>,
}

impl<T: Real> VelocityField2D<T> {
    pub fn new(nx: usize, ny: usize, xmax: T, ymax: T, values: Vec<T>) -> Result<Self> {
        if nx < 5 || ny < 5 {
            return Err(Error::invalid("grid", format!("need nx, ny >= 5, got {nx} x {ny}")));
        }
        if !(xmax > T::zero() && ymax > T::zero()) || !(xmax.is_finite() && ymax.is_finite()) {
            return Err(Error::invalid("extent", "xmax and ymax must be positive and finite"));
        }
        if values.len() != nx * ny {
            return Err(Error::invalid(
                "values",
                format!("expected {} samples for {nx} x {ny}, got {}", nx * ny, values.len()),
            ));
        }
        if let Some(p) = values.iter().position(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::invalid("values", format!("sample {p} is not a positive finite speed")));
        }
        Ok(VelocityField2D { nx, ny, xmax, ymax, values })
    }

    pub fn from_fn(nx: usize, ny: usize, xmax: T, ymax: T, f: impl Fn(T, T) -> T) -> Result<Self> {
        let (hx, hy) = (xmax / T::count(nx - 1), (ymax + ymax) / T::count(ny - 1));
        let values = (0..ny)
            .flat_map(|i| (0..nx).map(move |j| (j, i)))
            .map(|(j, i)| f(T::count(j) * hx, -ymax + T::count(i) * hy))
            .collect();
        Self::new(nx, ny, xmax, ymax, values)
    }

    pub fn constant(v: T, nx: usize, ny: usize, xmax: T, ymax: T) -> Result<Self> {
        Self::new(nx, ny, xmax, ymax, vec![v; nx * ny])
    }

    /// Plain-text grid: header `nx ny xmax ymax`, then `nx·ny` row-major values.
    /// Separators may be whitespace or commas; `#` starts a comment.
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            msg,
        };
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
            .filter(|t| !t.is_empty());
        let mut header = |name: &str| {
            tokens
                .next()
                .ok_or_else(|| parse_err(format!("missing header field {name}")))
                .map(str::to_owned)
        };
        let nx: usize = header("nx")?.parse().map_err(|e| parse_err(format!("nx: {e}")))?;
        let ny: usize = header("ny")?.parse().map_err(|e| parse_err(format!("ny: {e}")))?;
        let xmax: f64 = header("xmax")?.parse().map_err(|e| parse_err(format!("xmax: {e}")))?;
        let ymax: f64 = header("ymax")?.parse().map_err(|e| parse_err(format!("ymax: {e}")))?;
        let values = tokens
            .enumerate()
            .map(|(k, t)| {
                t.parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| parse_err(format!("value {k}: {e}")))
            })
            .collect::<Result<Vec<T>>>()?;
        Self::new(nx, ny, T::lit(xmax), T::lit(ymax), values)
    }

    /// Inverse of [`read`](Self::read).
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = format!(
            "# nx ny xmax ymax, then rows of constant y\n{} {} {} {}\n",
            self.nx,
            self.ny,
            self.xmax.to_f64_lossy(),
            self.ymax.to_f64_lossy()
        );
        for row in self.values.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|v| format!("{}", v.to_f64_lossy())).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        fs::write(path, out).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn xmax(&self) -> T {
        self.xmax
    }

    pub fn ymax(&self) -> T {
        self.ymax
    }

    pub fn hx(&self) -> T {
        self.xmax / T::count(self.nx - 1)
    }

    pub fn hy(&self) -> T {
        (self.ymax + self.ymax) / T::count(self.ny - 1)
    }

    pub fn y(&self, i: usize) -> T {
        -self.ymax + T::count(i) * self.hy()
    }

    pub fn value(&self, j: usize, i: usize) -> T {
        self.values[i * self.nx + j]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// The speed along row `i` as a 1D model on `[0, xmax]`.
    pub fn row(&self, i: usize) -> Result<VelocityModel<T>> {
        let samples = self.values[i * self.nx..(i + 1) * self.nx].to_vec();
        VelocityModel::from_samples(samples, self.xmax, Role::True)
    }

    /// Same geometry, constant speed.
    pub fn constant_like(&self, v: T) -> Result<Self> {
        Self::constant(v, self.nx, self.ny, self.xmax, self.ymax)
    }

    pub fn max_speed(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// `v(0, y)` if it is constant along the source line.
    pub fn source_line_speed(&self) -> Result<T> {
        let v0 = self.value(0, 0);
        for i in 1..self.ny {
            let v = self.value(0, i);
            if ((v - v0) / v0).abs() > T::lit(1e-12) {
                return Err(Error::invalid(
                    "velocity field",
                    format!(
                        "v(0, y) must be constant along the source line; found {} and {}",
                        v0.to_f64_lossy(),
                        v.to_f64_lossy()
                    ),
                ));
            }
        }
        Ok(v0)
    }
}

/// Built-in field on `nx × ny` samples over `[0, 1] × [−ymax, ymax]`, with `v(0, y) = 1`.
///
/// `block` has a fast rectangular inclusion; `dipping-interface` steps from 1.0 to 1.4
/// across the line `x = 0.45 + 0.3·y`.
pub fn builtin_2d<T: Real>(name: &str, nx: usize, ny: usize, ymax: T) -> Result<VelocityField2D<T>> {
    let xmax = T::lit(DEFAULT_XMAX);
    let f: fn(f64, f64) -> f64 = match name {
        "constant" => |_, _| 1.0,
        "block" => |x, y| {
            if (0.3..=0.5).contains(&x) && (0.0..=0.12).contains(&y) {
                1.5
            } else {
                1.0
            }
        },
        "dipping-interface" => |x, y| if x < 0.45 + 0.3 * y { 1.0 } else { 1.4 },
        other => {
            return Err(Error::invalid(
                "model",
                format!("unknown 2D built-in '{other}'; choose one of {}", BUILTIN_2D.join(", ")),
            ))
        }
    };
    VelocityField2D::from_fn(nx, ny, xmax, ymax, |x, y| T::lit(f(x.to_f64_lossy(), y.to_f64_lossy())))
}
