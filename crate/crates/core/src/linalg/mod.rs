//! Dense complex linear algebra for the small matrices this crate works
//! with (enlarged systems stay below ~128 x 128 at desk scale).

mod eigh;
mod expm;

pub use eigh::hermitian_eigenvalues;
pub use expm::expm;

use ndarray::{Array1, Array2};

use crate::error::{Result, SchroError};
use crate::float::{Cplx, Real};

pub type CVec<T> = Array1<Cplx<T>>;
pub type CMat<T> = Array2<Cplx<T>>;

/// Conjugate transpose.
pub fn adjoint<T: Real>(a: &CMat<T>) -> CMat<T> {
    a.t().mapv(|z| z.conj())
}

/// Largest entry magnitude.
pub fn max_abs<T: Real>(a: &CMat<T>) -> T {
    a.iter().fold(T::zero(), |m, z| m.max(z.norm()))
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_1<T: Real>(a: &CMat<T>) -> T {
    let mut best = T::zero();
    for col in a.columns() {
        let s = col.iter().fold(T::zero(), |acc, z| acc + z.norm());
        best = best.max(s);
    }
    best
}

/// Euclidean norm of a complex vector.
pub fn vec_norm<T: Real>(v: &CVec<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Spectral norm of a Hermitian matrix via its eigenvalues.
pub fn hermitian_spectral_norm<T: Real>(a: &CMat<T>) -> Result<T> {
    let eigs = hermitian_eigenvalues(a)?;
    Ok(eigs.iter().fold(T::zero(), |m, &l| m.max(l.abs())))
}

/// Is `a` Hermitian to entrywise tolerance `tol`?
pub fn is_hermitian<T: Real>(a: &CMat<T>, tol: T) -> bool {
    let n = a.nrows();
    if n != a.ncols() {
        return false;
    }
    for i in 0..n {
        for j in i..n {
            let d = a[(i, j)] - a[(j, i)].conj();
            if d.norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Solve `A X = B` for dense complex `A` by LU with partial pivoting.
/// `B` is consumed column by column.
pub fn lu_solve<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Result<CMat<T>> {
    let n = a.nrows();
    if n != a.ncols() || n != b.nrows() {
        return Err(SchroError::invalid("lu_solve: dimension mismatch"));
    }
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        // Pivot on the largest magnitude in this column.
        let mut pivot = col;
        let mut best = lu[(col, col)].norm();
        for row in (col + 1)..n {
            let mag = lu[(row, col)].norm();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best == T::zero() {
            return Err(SchroError::numerical("lu_solve: singular matrix"));
        }
        if pivot != col {
            perm.swap(col, pivot);
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = tmp;
            }
        }
        let diag = lu[(col, col)];
        for row in (col + 1)..n {
            let factor = lu[(row, col)] / diag;
            lu[(row, col)] = factor;
            for j in (col + 1)..n {
                let sub = factor * lu[(col, j)];
                lu[(row, j)] = lu[(row, j)] - sub;
            }
        }
    }

    let mut x = CMat::<T>::zeros((n, b.ncols()));
    for rhs in 0..b.ncols() {
        // Forward substitution on the permuted right-hand side.
        let mut y = vec![Cplx::new(T::zero(), T::zero()); n];
        for i in 0..n {
            let mut acc = b[(perm[i], rhs)];
            for j in 0..i {
                acc = acc - lu[(i, j)] * y[j];
            }
            y[i] = acc;
        }
        // Back substitution.
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in (i + 1)..n {
                acc = acc - lu[(i, j)] * x[(j, rhs)];
            }
            x[(i, rhs)] = acc / lu[(i, i)];
        }
    }
    Ok(x)
}

/// Identity matrix.
pub fn eye<T: Real>(n: usize) -> CMat<T> {
    let mut m = CMat::<T>::zeros((n, n));
    for i in 0..n {
        m[(i, i)] = Cplx::new(T::one(), T::zero());
    }
    m
}
