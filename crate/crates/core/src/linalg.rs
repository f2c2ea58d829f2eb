//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Modified Gram-Schmidt against the inner product `g`, seeded with the
/// columns of `seeds` in order. Seeds that become dependent are skipped.
/// Returns a matrix whose columns are g-orthonormal.
pub fn gram_schmidt(g: &DMatrix<f64>, seeds: &DMatrix<f64>, want: usize) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(want);
    for c in 0..seeds.ncols() {
        if basis.len() == want {
            break;
        }
        let mut v = seeds.column(c).into_owned();
        let scale = (v.dot(&(g * &v))).sqrt();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&(g * &v));
                v -= b * proj;
            }
        }
        let norm = v.dot(&(g * &v)).sqrt();
        if !(norm > 1e-10 * scale.max(1e-300)) {
            continue;
        }
        basis.push(v / norm);
    }
    if basis.len() < want {
        return Err(Error::Invalid(format!(
            "Gram-Schmidt found {} of {} independent directions",
            basis.len(),
            want
        )));
    }
    let mut out = DMatrix::zeros(n, want);
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    Ok(out)
}

/// g-orthonormal frame seeded by the coordinate directions.
pub fn orthonormal_frame(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    gram_schmidt(g, &DMatrix::identity(n, n), n)
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix with
/// the sign of R's diagonal folded into Q).
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let col = -q.column(j);
            q.set_column(j, &col);
        }
    }
    q
}

/// max |QᵀQ − I|.
pub fn orthonormality_residual(q: &DMatrix<f64>) -> f64 {
    let g = q.transpose() * q;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}
