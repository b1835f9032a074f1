use super::{EigDecomposition, Matrix};
use crate::error::{Error, Result};
use crate::real::Real;

/// Orders above this use inverse iteration for eigenvectors instead of accumulated QL rotations.
pub const QL_VECTOR_LIMIT: usize = 600;
const MAX_QL_ITER: usize = 60;

/// Symmetric tridiagonal matrix: `diag[i]` on the diagonal, `off[i]` couples rows `i` and `i+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::invalid(
                "tridiagonal",
                format!("{} diagonal entries need {} couplings, got {}", diag.len(), diag.len().saturating_sub(1), off.len()),
            ));
        }
        Ok(SymTridiagonal { diag, off })
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.order();
        let mut y: Vec<T> = self.diag.iter().zip(x).map(|(&d, &v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    pub fn to_dense(&self) -> Matrix<T> {
        let n = self.order();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for i in 0..n - 1 {
            m[(i, i + 1)] = self.off[i];
            m[(i + 1, i)] = self.off[i];
        }
        m
    }

    /// Maximum absolute row sum.
    pub fn norm1(&self) -> T {
        let n = self.order();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(T::zero(), T::max)
    }

    /// Ascending eigenvalues by implicit QL.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(T::zero());
        ql_implicit(&mut d, &mut e, None)?;
        d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        Ok(d)
    }

    /// Full eigendecomposition; picks the accumulated-rotation QL for small orders
    /// and inverse iteration above [`QL_VECTOR_LIMIT`].
    pub fn eig(&self) -> Result<EigDecomposition<T>> {
        if self.order() <= QL_VECTOR_LIMIT {
            self.eig_ql()
        } else {
            self.eig_inverse_iteration()
        }
    }

    /// Implicit QL with accumulated rotations, O(n³).
    pub fn eig_ql(&self) -> Result<EigDecomposition<T>> {
        let n = self.order();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(T::zero());
        let mut z = Matrix::identity(n);
        ql_implicit(&mut d, &mut e, Some(&mut z))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("finite eigenvalues"));
        let values = order.iter().map(|&i| d[i]).collect();
        let vectors = Matrix::from_fn(n, n, |r, c| z[(r, order[c])]);
        Ok(EigDecomposition { values, vectors })
    }

    /// QL eigenvalues followed by inverse iteration, O(n²) for well separated spectra.
    ///
    /// Vectors whose eigenvalues lie within `1e-7·‖T‖₁` of each other are
    /// reorthogonalized against one another.
    pub fn eig_inverse_iteration(&self) -> Result<EigDecomposition<T>> {
        let n = self.order();
        let values = self.eigenvalues()?;
        let norm = self.norm1().max(T::min_positive_value());
        let ortol = T::lit(1e-7) * norm;
        let tiny = T::epsilon() * norm;
        let mut vectors = Matrix::zeros(n, n);
        let mut cluster_start = 0;
        let mut seed: u64 = 0x9e37_79b9_7f4a_7c15;
        let mut cluster: Vec<Vec<T>> = Vec::new();

        for (idx, &lambda) in values.iter().enumerate() {
            if idx == 0 || lambda - values[idx - 1] > ortol {
                cluster_start = idx;
                cluster.clear();
            }
            // Separate coincident eigenvalues so each shifted factorization differs.
            let shift = lambda + T::count(idx - cluster_start) * tiny;
            let lu = ShiftedLu::factor(self, shift, tiny);
            let mut x: Vec<T> = (0..n)
                .map(|_| {
                    seed ^= seed << 13;
                    seed ^= seed >> 7;
                    seed ^= seed << 17;
                    T::lit((seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
                })
                .collect();
            normalize(&mut x);
            for _ in 0..3 {
                x = lu.solve(&x);
                for prev in &cluster {
                    let p = crate::real::dot(prev, &x);
                    crate::real::axpy(-p, prev, &mut x);
                }
                if !normalize(&mut x) {
                    return Err(Error::NoConvergence {
                        role: "tridiagonal inverse iteration".into(),
                        iterations: idx,
                    });
                }
            }
            vectors.set_col(idx, &x);
            cluster.push(x);
        }
        Ok(EigDecomposition { values, vectors })
    }
}

fn normalize<T: Real>(x: &mut [T]) -> bool {
    let nrm = crate::real::norm2(x);
    if !(nrm > T::zero()) || !nrm.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= nrm);
    true
}

/// LU factorization with partial pivoting of `T − σI`.
struct ShiftedLu<T> {
    u0: Vec<T>,
    u1: Vec<T>,
    u2: Vec<T>,
    mult: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> ShiftedLu<T> {
    fn factor(t: &SymTridiagonal<T>, sigma: T, tiny: T) -> Self {
        let n = t.order();
        let mut u0: Vec<T> = t.diag.iter().map(|&d| d - sigma).collect();
        let mut u1: Vec<T> = t.off.clone();
        u1.push(T::zero());
        let mut u2 = vec![T::zero(); n];
        let mut mult = vec![T::zero(); n];
        let mut swapped = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            let sub = t.off[i];
            if u0[i].abs() >= sub.abs() {
                let piv = if u0[i] == T::zero() { tiny } else { u0[i] };
                u0[i] = piv;
                let l = sub / piv;
                mult[i] = l;
                u0[i + 1] -= l * u1[i];
            } else {
                let l = u0[i] / sub;
                mult[i] = l;
                swapped[i] = true;
                let old_u1 = u1[i];
                let next_u1 = u1[i + 1];
                u0[i] = sub;
                u1[i] = u0[i + 1];
                u2[i] = next_u1;
                u0[i + 1] = old_u1 - l * u1[i];
                u1[i + 1] = -l * next_u1;
            }
        }
        if u0[n - 1] == T::zero() {
            u0[n - 1] = tiny;
        }
        for p in u0.iter_mut() {
            if p.abs() < tiny {
                *p = tiny.copysign(*p);
            }
        }
        ShiftedLu {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, b: &[T]) -> Vec<T> {
        let n = b.len();
        let mut y = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            let yi = y[i];
            y[i + 1] -= self.mult[i] * yi;
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}

/// Implicit QL iteration with Wilkinson-type shifts on `(d, e)`, `e[n-1] = 0`.
fn ql_implicit<T: Real>(d: &mut [T], e: &mut [T], mut z: Option<&mut Matrix<T>>) -> Result<()> {
    let n = d.len();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= T::epsilon() * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITER {
                return Err(Error::NoConvergence {
                    role: "tridiagonal QL".into(),
                    iterations: iter,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = mm;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[mm] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let zk1 = z[(k, i + 1)];
                        let zk = z[(k, i)];
                        z[(k, i + 1)] = s * zk + c * zk1;
                        z[(k, i)] = c * zk - s * zk1;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = T::zero();
        }
    }
    Ok(())
}

/// Symmetric tridiagonal matrix with strictly positive couplings (a Jacobi matrix).
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiMatrix<T> {
    inner: SymTridiagonal<T>,
}

impl<T: Real> JacobiMatrix<T> {
    pub fn new(alpha: Vec<T>, beta: Vec<T>) -> Result<Self> {
        if let Some((i, b)) = beta.iter().enumerate().find(|(_, &b)| !(b > T::zero())) {
            return Err(Error::invalid(
                "jacobi matrix",
                format!("coupling beta_{} = {} is not strictly positive", i + 1, b),
            ));
        }
        Ok(JacobiMatrix {
            inner: SymTridiagonal::new(alpha, beta)?,
        })
    }

    pub fn alpha(&self) -> &[T] {
        &self.inner.diag
    }

    pub fn beta(&self) -> &[T] {
        &self.inner.off
    }

    pub fn order(&self) -> usize {
        self.inner.order()
    }

    pub fn as_tridiagonal(&self) -> &SymTridiagonal<T> {
        &self.inner
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        self.inner.matvec(x)
    }

    pub fn to_dense(&self) -> Matrix<T> {
        self.inner.to_dense()
    }

    pub fn eig(&self) -> Result<EigDecomposition<T>> {
        self.inner.eig()
    }
}
