use crate::error::{Error, Result};
use crate::real::Real;

/// A symmetric linear operator known only through its action.
pub trait LinearOperator<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
    /// An upper bound on the spectrum (e.g. Gershgorin); the lower bound is assumed to be 0.
    fn spectral_bound(&self) -> T;
}

/// Chebyshev interpolant of a scalar function on `[lo, hi]`,
/// used to apply `f(A)` to vectors with only matrix-vector products.
#[derive(Clone, Debug)]
pub struct ChebyshevSeries<T> {
    coeffs: Vec<T>,
    lo: T,
    hi: T,
}

impl<T: Real> ChebyshevSeries<T> {
    /// Doubles the degree until the trailing coefficients drop below `tol·max|c_k|`.
    pub fn fit(f: impl Fn(T) -> T, lo: T, hi: T, tol: T, max_degree: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::invalid("chebyshev interval", "upper bound must exceed lower bound"));
        }
        let mut degree = 16;
        loop {
            let coeffs = interpolate(&f, lo, hi, degree);
            // Σ|c_k| bounds sup|f| on the interval.
            let scale = coeffs.iter().fold(T::zero(), |m, &c| m + c.abs());
            let tail = coeffs[degree - 4..].iter().fold(T::zero(), |m, &c| m.max(c.abs()));
            if tail <= tol * scale || scale == T::zero() {
                let keep = coeffs
                    .iter()
                    .rposition(|c| c.abs() > tol * scale * T::lit(1e-3))
                    .map_or(1, |p| p + 1);
                return Ok(ChebyshevSeries {
                    coeffs: coeffs[..keep].to_vec(),
                    lo,
                    hi,
                });
            }
            if degree >= max_degree {
                return Err(Error::breakdown(
                    "chebyshev fit",
                    degree,
                    "series did not converge; the time step may be too large for the grid",
                ));
            }
            degree = (degree * 2).min(max_degree);
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Scalar evaluation by Clenshaw's recurrence.
    pub fn eval(&self, x: T) -> T {
        let t = self.map(x);
        let (mut b1, mut b2) = (T::zero(), T::zero());
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = c + (t + t) * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] * T::lit(0.5) + t * b1 - b2
    }

    fn map(&self, x: T) -> T {
        (x + x - (self.hi + self.lo)) / (self.hi - self.lo)
    }

    /// `f(A) x` by the vector Clenshaw recurrence (one product with `A` per coefficient).
    pub fn apply<Op: LinearOperator<T> + ?Sized>(&self, op: &Op, x: &[T]) -> Vec<T> {
        let n = x.len();
        let scale = T::lit(2.0) / (self.hi - self.lo);
        let shift = (self.hi + self.lo) / (self.hi - self.lo);
        // t(A) v = scale·A v − shift·v
        let mut av = vec![T::zero(); n];
        let mut tmap = |v: &[T], out: &mut [T]| {
            op.apply(v, &mut av);
            for i in 0..n {
                out[i] = scale * av[i] - shift * v[i];
            }
        };
        let mut b1 = vec![T::zero(); n];
        let mut b2 = vec![T::zero(); n];
        let mut tb = vec![T::zero(); n];
        for &c in self.coeffs[1..].iter().rev() {
            tmap(&b1, &mut tb);
            for i in 0..n {
                let b0 = c * x[i] + (tb[i] + tb[i]) - b2[i];
                b2[i] = b1[i];
                b1[i] = b0;
            }
        }
        tmap(&b1, &mut tb);
        let half_c0 = self.coeffs[0] * T::lit(0.5);
        (0..n).map(|i| half_c0 * x[i] + tb[i] - b2[i]).collect()
    }
}

fn interpolate<T: Real>(f: &impl Fn(T) -> T, lo: T, hi: T, degree: usize) -> Vec<T> {
    let np = degree + 1;
    let half = T::lit(0.5);
    let pi = T::PI();
    let nodes: Vec<T> = (0..np)
        .map(|j| (pi * (T::count(j) + half) / T::count(np)).cos())
        .collect();
    let vals: Vec<T> = nodes
        .iter()
        .map(|&t| f(half * (hi - lo) * t + half * (hi + lo)))
        .collect();
    (0..np)
        .map(|k| {
            let s: T = (0..np)
                .map(|j| vals[j] * (pi * T::count(k) * (T::count(j) + half) / T::count(np)).cos())
                .sum();
            s * T::lit(2.0) / T::count(np)
        })
        .collect()
}
