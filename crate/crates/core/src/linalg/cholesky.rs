use super::{Matrix, SymMatrix};
use crate::error::{Error, Result};
use crate::real::Real;

/// Lower-triangular factor `L` with `L Lᵀ = A` and positive diagonal.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

/// Factors a symmetric positive definite matrix.
///
/// A non-positive pivot yields [`Error::NotPositiveDefinite`] with its 0-based index.
pub fn cholesky<T: Real>(a: &SymMatrix<T>) -> Result<Cholesky<T>> {
    let n = a.order();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: d.to_f64_lossy(),
            });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(Cholesky { l })
}

impl<T: Real> Cholesky<T> {
    pub fn factor(&self) -> &Matrix<T> {
        &self.l
    }

    pub fn order(&self) -> usize {
        self.l.rows()
    }

    /// Solves `L x = b`.
    pub fn solve_lower(&self, b: &[T]) -> Vec<T> {
        let n = self.order();
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[(i, k)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solves `Lᵀ x = b`.
    pub fn solve_upper(&self, b: &[T]) -> Vec<T> {
        let n = self.order();
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `L⁻¹ B L⁻ᵀ`, the congruence that turns `B v = λ A v` into a standard problem.
    pub fn congruence(&self, b: &SymMatrix<T>) -> Result<SymMatrix<T>> {
        let n = self.order();
        // Columns of X = L⁻¹ B, then rows of X L⁻ᵀ = (L⁻¹ Xᵀ)ᵀ.
        let mut x = Matrix::zeros(n, n);
        for j in 0..n {
            x.set_col(j, &self.solve_lower(&b.as_matrix().col(j)));
        }
        let xt = x.transpose();
        let mut y = Matrix::zeros(n, n);
        for j in 0..n {
            y.set_col(j, &self.solve_lower(&xt.col(j)));
        }
        SymMatrix::symmetrize(&y)
    }

    /// `L⁻¹`.
    pub fn inverse_factor(&self) -> Matrix<T> {
        let n = self.order();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            inv.set_col(j, &self.solve_lower(&e));
        }
        inv
    }
}
