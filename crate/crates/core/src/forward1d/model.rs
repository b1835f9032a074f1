use std::path::Path;

use crate::error::{Error, Result};
use crate::real::Real;

/// Whether a model generated the data or serves as the inversion background.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    True,
    Reference,
}

/// Piecewise-linear wave speed on `[0, xmax]`.
///
/// Knot positions are nondecreasing; a repeated position encodes a jump, with the
/// speed at the jump itself taken from the right. Past the last knot the speed is
/// held constant.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityModel<T> {
    xs: Vec<T>,
    vs: Vec<T>,
    xmax: T,
    role: Role,
}

impl<T: Real> VelocityModel<T> {
    pub fn new(xs: Vec<T>, vs: Vec<T>, xmax: T, role: Role) -> Result<Self> {
        if xs.is_empty() || xs.len() != vs.len() {
            return Err(Error::invalid("velocity model", "need matching, nonempty knot and speed lists"));
        }
        if xs[0] != T::zero() {
            return Err(Error::invalid("velocity model", "first knot must sit at x = 0"));
        }
        if !(xmax > T::zero()) || !xmax.is_finite() {
            return Err(Error::invalid("xmax", "must be positive and finite"));
        }
        for w in xs.windows(2) {
            if !(w[1] >= w[0]) || !w[1].is_finite() {
                return Err(Error::invalid("velocity model", "knot positions must be finite and nondecreasing"));
            }
        }
        for w in xs.windows(3) {
            if w[0] == w[2] {
                return Err(Error::invalid("velocity model", "at most two knots may share a position"));
            }
        }
        if let Some(v) = vs.iter().find(|v| !(**v > T::zero()) || !v.is_finite()) {
            return Err(Error::invalid("velocity", format!("speeds must be positive and finite, got {v}")));
        }
        Ok(VelocityModel { xs, vs, xmax, role })
    }

    pub fn constant(v: T, xmax: T, role: Role) -> Result<Self> {
        Self::new(vec![T::zero()], vec![v], xmax, role)
    }

    /// Speeds sampled uniformly on `[0, xmax]` (first sample at 0, last at xmax).
    pub fn from_samples(samples: Vec<T>, xmax: T, role: Role) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Self::new(vec![T::zero()], samples, xmax, role);
        }
        let xs = (0..n).map(|i| xmax * T::count(i) / T::count(n - 1)).collect();
        Self::new(xs, samples, xmax, role)
    }

    /// Reads a two-column `position speed` file; `#` starts a comment. `xmax` is the last position.
    pub fn read(path: &Path, role: Role) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parse_err = |line: usize, msg: &str| Error::Parse {
            path: path.to_path_buf(),
            msg: format!("line {line}: {msg}"),
        };
        let (mut xs, mut vs) = (Vec::new(), Vec::new());
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(parse_err(i + 1, "expected two columns: position speed"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| parse_err(i + 1, "not a number"));
            xs.push(T::lit(num(cols[0])?));
            vs.push(T::lit(num(cols[1])?));
        }
        let xmax = *xs.last().ok_or_else(|| parse_err(0, "no samples"))?;
        Self::new(xs, vs, xmax, role)
    }

    pub fn xmax(&self) -> T {
        self.xmax
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn knots(&self) -> (&[T], &[T]) {
        (&self.xs, &self.vs)
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// Multiplies every speed by `k`.
    pub fn scaled(&self, k: T) -> Result<Self> {
        Self::new(self.xs.clone(), self.vs.iter().map(|&v| v * k).collect(), self.xmax, self.role)
    }

    /// Stretches positions and `xmax` by `k`, keeping speeds.
    pub fn stretched(&self, k: T) -> Result<Self> {
        Self::new(self.xs.iter().map(|&x| x * k).collect(), self.vs.clone(), self.xmax * k, self.role)
    }

    pub fn speed(&self, x: T) -> T {
        let n = self.xs.len();
        // Last knot with position <= x, so jumps resolve to the right value.
        let i = self.xs.partition_point(|&p| p <= x);
        if i == 0 {
            return self.vs[0];
        }
        if i == n {
            return self.vs[n - 1];
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (v0, v1) = (self.vs[i - 1], self.vs[i]);
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    pub fn origin_speed(&self) -> T {
        self.speed(T::zero())
    }

    pub fn is_constant(&self) -> bool {
        self.vs.iter().all(|&v| v == self.vs[0])
    }

    /// Linear pieces clipped to `[a, b]`, as `(p, q, v(p+), v(q-))`.
    fn pieces(&self, a: T, b: T) -> Vec<(T, T, T, T)> {
        let mut out = Vec::new();
        if !(b > a) {
            return out;
        }
        let n = self.xs.len();
        let mut seg = |x0: T, x1: T, v0: T, v1: T| {
            let p = a.max(x0);
            let q = b.min(x1);
            if q > p {
                let at = |x: T| {
                    if x1.is_infinite() || x1 == x0 {
                        v0
                    } else {
                        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
                    }
                };
                out.push((p, q, at(p), at(q)));
            }
        };
        if a < self.xs[0] {
            seg(T::neg_infinity(), self.xs[0], self.vs[0], self.vs[0]);
        }
        for i in 0..n - 1 {
            if self.xs[i + 1] > self.xs[i] {
                seg(self.xs[i], self.xs[i + 1], self.vs[i], self.vs[i + 1]);
            }
        }
        seg(self.xs[n - 1], T::infinity(), self.vs[n - 1], self.vs[n - 1]);
        out
    }

    /// `∫_a^b v(x)^{-2} dx`, exact for piecewise-linear speed.
    pub fn inv_sq_integral(&self, a: T, b: T) -> T {
        self.pieces(a, b)
            .into_iter()
            .map(|(p, q, vp, vq)| (q - p) / (vp * vq))
            .sum()
    }

    /// `∫_a^b 1/v(x) dx`, exact for piecewise-linear speed.
    pub fn slowness_integral(&self, a: T, b: T) -> T {
        self.pieces(a, b)
            .into_iter()
            .map(|(p, q, vp, vq)| (q - p) / vp * log_ratio(vq, vp))
            .sum()
    }

    /// `∫_a^b v(x) dx`.
    pub fn speed_integral(&self, a: T, b: T) -> T {
        self.pieces(a, b)
            .into_iter()
            .map(|(p, q, vp, vq)| (q - p) * (vp + vq) * T::lit(0.5))
            .sum()
    }

    /// Traveltime coordinate `∫_0^x dx'/v`.
    pub fn traveltime(&self, x: T) -> T {
        self.slowness_integral(T::zero(), x)
    }

    pub fn total_traveltime(&self) -> T {
        self.traveltime(self.xmax)
    }

    /// Inverse of [`traveltime`](Self::traveltime); extends linearly past the last knot.
    pub fn inverse_traveltime(&self, t: T) -> T {
        if !(t > T::zero()) {
            return T::zero();
        }
        let mut acc = T::zero();
        for (p, q, vp, vq) in self.pieces(T::zero(), T::infinity()) {
            let dt = if q.is_infinite() {
                T::infinity()
            } else {
                (q - p) / vp * log_ratio(vq, vp)
            };
            if acc + dt >= t {
                let s = if q.is_infinite() { T::zero() } else { (vq - vp) / (q - p) };
                let r = t - acc;
                let z = s * r;
                // v(x) = vp·exp(s·r), so x − p = vp·(exp(s r) − 1)/s.
                let growth = if z.abs() < T::lit(1e-8) {
                    T::one() + z * T::lit(0.5) + z * z / T::lit(6.0)
                } else {
                    z.exp_m1() / z
                };
                return p + vp * r * growth;
            }
            acc += dt;
        }
        unreachable!("tail piece is unbounded")
    }
}

/// `ln(1 + r)/r` with `r = vq/vp − 1`, stable near `r = 0`.
fn log_ratio<T: Real>(vq: T, vp: T) -> T {
    let r = (vq - vp) / vp;
    if r.abs() < T::lit(1e-8) {
        T::one() - r * T::lit(0.5) + r * r / T::lit(3.0)
    } else {
        r.ln_1p() / r
    }
}
