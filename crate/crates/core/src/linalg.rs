//! Dense complex linear-algebra helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Real part of `<v, A v>`; exact value for Hermitian `A`.
pub fn quadratic_form(a: &CMatrix, v: &CVector) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for col in 0..n {
        let vc = v[col];
        if vc == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut row_sum = Complex64::new(0.0, 0.0);
        for row in 0..n {
            row_sum += v[row].conj() * a[(row, col)];
        }
        acc += (row_sum * vc).re;
    }
    acc
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Largest absolute eigenvalue of a Hermitian matrix (its operator norm).
pub fn hermitian_norm(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest singular value of an arbitrary complex matrix.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |m: f64, &x| m.max(x))
}

/// Largest entrywise deviation from Hermiticity, with its position.
pub fn hermiticity_defect(a: &CMatrix) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for r in 0..a.nrows() {
        for c in r..a.ncols() {
            let d = (a[(r, c)] - a[(c, r)].conj()).norm();
            if d > worst.0 {
                worst = (d, r, c);
            }
        }
    }
    worst
}

/// Commutator `[diag(d), A]`, entries `(d_r - d_c) a_rc`.
pub fn diagonal_commutator(diag: &[f64], a: &CMatrix) -> CMatrix {
    CMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a[(r, c)] * (diag[r] - diag[c]))
}

/// Real Frobenius inner product `Re tr(A^* B)`.
pub fn frobenius_dot(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn normalize(v: &mut CVector) {
    let n = v.norm();
    if n > 0.0 {
        *v /= Complex64::new(n, 0.0);
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
