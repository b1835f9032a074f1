use super::{Matrix, SymMatrix};
use crate::error::{Error, Result};
use crate::real::Real;

pub const MAX_SWEEPS: usize = 100;
const OFF_TOL: f64 = 1e-14;
const FROB_FLOOR: f64 = 1e-300;

/// Eigenpairs of a symmetric matrix: ascending values, orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> EigDecomposition<T> {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) Vᵀ x`.
    pub fn apply(&self, f: impl Fn(T) -> T, x: &[T]) -> Vec<T> {
        let mut c = self.vectors.tr_matvec(x);
        for (ci, &l) in c.iter_mut().zip(&self.values) {
            *ci *= f(l);
        }
        self.vectors.matvec(&c)
    }

    /// `V f(Λ) Vᵀ` as a dense symmetric matrix.
    pub fn function_matrix(&self, f: impl Fn(T) -> T) -> SymMatrix<T> {
        let n = self.order();
        let fl: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        SymMatrix::from_fn(n, |i, j| (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)]).sum())
            .expect("order >= 1")
    }

    pub fn reconstruct(&self) -> SymMatrix<T> {
        self.function_matrix(|l| l)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Stops when the off-diagonal Frobenius mass falls below `1e-14·‖A‖_F`; more than
/// [`MAX_SWEEPS`] sweeps is reported as non-convergence.
pub fn sym_eig<T: Real>(a: &SymMatrix<T>) -> Result<EigDecomposition<T>> {
    sym_eig_named(a, "symmetric matrix")
}

pub fn sym_eig_named<T: Real>(a: &SymMatrix<T>, role: &str) -> Result<EigDecomposition<T>> {
    let n = a.order();
    let mut m = a.as_matrix().clone();
    if !m.is_finite() {
        return Err(Error::invalid(role, "non-finite entries"));
    }
    let mut v = Matrix::identity(n);
    let tol = T::lit(OFF_TOL) * a.frobenius().max(T::lit(FROB_FLOOR));
    let off = |m: &Matrix<T>| -> T {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off(&m) <= tol;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                role: role.to_string(),
                iterations: sweeps,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = T::zero();
                m[(q, p)] = T::zero();
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = off(&m) <= tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigDecomposition { values, vectors })
}

/// `V f(Λ) Vᵀ x`.
pub fn apply_matrix_function<T: Real>(
    eig: &EigDecomposition<T>,
    f: impl Fn(T) -> T,
    x: &[T],
) -> Vec<T> {
    eig.apply(f, x)
}

/// Ratio of largest to smallest absolute eigenvalue; `+∞` when the smallest vanishes.
pub fn condition_number<T: Real>(a: &SymMatrix<T>) -> Result<T> {
    let eig = sym_eig_named(a, "condition number")?;
    Ok(condition_from_values(&eig.values))
}

pub(crate) fn condition_from_values<T: Real>(values: &[T]) -> T {
    let big = values.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let small = values.iter().fold(T::infinity(), |m, &x| m.min(x.abs()));
    if small <= T::epsilon() * big || small == T::zero() {
        T::infinity()
    } else {
        big / small
    }
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues below `1e-12·λ_max` are treated as a rank deficiency.
pub fn sqrt_spd<T: Real>(a: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let eig = sym_eig_named(a, "matrix square root")?;
    check_rank(&eig.values, "matrix square root")?;
    Ok(eig.function_matrix(|l| l.sqrt()))
}

/// Inverse of the principal square root.
pub fn inv_sqrt_spd<T: Real>(a: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let eig = sym_eig_named(a, "inverse square root")?;
    check_rank(&eig.values, "inverse square root")?;
    Ok(eig.function_matrix(|l| T::one() / l.sqrt()))
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn inv_spd<T: Real>(a: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let ch = super::cholesky(a)?;
    let n = a.order();
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![T::zero(); n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = T::zero());
        e[j] = T::one();
        inv.set_col(j, &ch.solve(&e));
    }
    SymMatrix::symmetrize(&inv)
}

fn check_rank<T: Real>(values: &[T], role: &str) -> Result<()> {
    let top = values.last().copied().unwrap_or(T::zero());
    let tol = T::lit(1e-12) * top.abs();
    if let Some((i, &l)) = values.iter().enumerate().find(|(_, &l)| l <= tol) {
        return Err(Error::breakdown(
            "rank check",
            i,
            format!("{role}: eigenvalue {:e} below 1e-12 x {:e}", l.to_f64_lossy(), top.to_f64_lossy()),
        ));
    }
    Ok(())
}
