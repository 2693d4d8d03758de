//! Dense complex matrix helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Square complex matrix carrying every operator in the toolkit.
pub type DenseOperator = DMatrix<Complex64>;

/// Complex state or amplitude vector.
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entry magnitude.
pub fn max_abs(m: &DenseOperator) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius(m: &DenseOperator) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    a * b - b * a
}

pub fn anticommutator(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    a * b + b * a
}

/// `exp(i * t * h)` for Hermitian `h`, via eigendecomposition.
pub fn expm_i_hermitian(h: &DenseOperator, t: f64) -> DenseOperator {
    let n = h.nrows();
    if t == 0.0 || h.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return DenseOperator::identity(n, n);
    }
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|&lam| (I * t * lam).exp()),
    ));
    v * phases * v.adjoint()
}

/// `‖U†U − 1‖_maxabs`.
pub fn unitarity_defect(u: &DenseOperator) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - DenseOperator::identity(n, n)))
}

/// Frobenius distance between `a` and `b` after removing the best global phase.
pub fn phase_distance(a: &DenseOperator, b: &DenseOperator) -> f64 {
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    frobenius(&(a * phase - b))
}
