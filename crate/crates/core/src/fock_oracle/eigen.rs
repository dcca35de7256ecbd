use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Dimension at or below which [`EigenStrategy::Auto`] diagonalizes densely.
pub const DENSE_LIMIT: usize = 400;

const SEED: u64 = 0x05ee_dec5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenStrategy {
    /// Full Hermitian diagonalization.
    Dense,
    /// Block subspace iteration for the `block` eigenpairs of largest magnitude.
    ///
    /// Intended for operators of small numerical rank; the result carries a
    /// Frobenius certificate of everything left out.
    Subspace { block: usize },
    /// Dense up to [`DENSE_LIMIT`], otherwise subspace iteration with the given block.
    Auto { block: usize },
}

/// Eigenpairs of a Hermitian matrix, sorted by decreasing eigenvalue.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: DMatrix<Complex64>,
    /// `‖A − V diag(values) V†‖_F`; bounds the spectrum that was not resolved.
    pub residual: f64,
    pub iterations: usize,
}

pub fn hermitian_eigen(a: &DMatrix<Complex64>, strategy: EigenStrategy) -> Result<EigenPairs> {
    match strategy {
        EigenStrategy::Dense => dense_eigh(a),
        EigenStrategy::Subspace { block } => subspace_eigh(a, block, 1e-13, 300),
        EigenStrategy::Auto { block } => {
            if a.nrows() <= DENSE_LIMIT {
                dense_eigh(a)
            } else {
                subspace_eigh(a, block, 1e-13, 300)
            }
        }
    }
}

pub fn dense_eigh(a: &DMatrix<Complex64>) -> Result<EigenPairs> {
    if a.nrows() != a.ncols() {
        return Err(Error::Eigen(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
    }
    let h = hermitize(a);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("dense Hermitian eigensolver did not converge".into()))?;
    let (values, vectors) = sorted(eig.eigenvalues.iter().copied().collect(), &eig.eigenvectors);
    let residual = frobenius_residual(a, &values, &vectors);
    Ok(EigenPairs { values, vectors, residual, iterations: 0 })
}

/// Block power iteration with Rayleigh–Ritz extraction.
///
/// Converges once every Ritz pair satisfies `‖Ax − θx‖ ≤ tol·max(1, |θ_max|)`.
pub fn subspace_eigh(a: &DMatrix<Complex64>, block: usize, tol: f64, max_iter: usize) -> Result<EigenPairs> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Eigen(format!("matrix is {}x{}, not square", n, a.ncols())));
    }
    let k = block.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let start = DMatrix::from_fn(n, k, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let mut v = orthonormalize(start);
    let mut worst = f64::INFINITY;
    for it in 1..=max_iter {
        let av = a * &v;
        let h = hermitize(&(v.adjoint() * &av));
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
            .ok_or_else(|| Error::Eigen("Rayleigh-Ritz step did not converge".into()))?;
        let (theta, s) = sorted(eig.eigenvalues.iter().copied().collect(), &eig.eigenvectors);
        let x = &v * &s;
        let ax = &av * &s;
        let scale = theta.iter().fold(1.0f64, |m, t| m.max(t.abs()));
        worst = (0..k).map(|j| (ax.column(j) - x.column(j) * Complex64::from(theta[j])).norm()).fold(0.0, f64::max);
        if worst <= tol * scale {
            let residual = frobenius_residual(a, &theta, &x);
            return Ok(EigenPairs { values: theta, vectors: x, residual, iterations: it });
        }
        v = orthonormalize(ax);
    }
    Err(Error::Eigen(format!("subspace iteration stalled after {max_iter} sweeps (Ritz residual {worst:e})")))
}

fn hermitize(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (a + a.adjoint()) * Complex64::from(0.5)
}

fn orthonormalize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let k = m.ncols();
    let q = m.qr().q();
    q.columns(0, k).into_owned()
}

fn sorted(values: Vec<f64>, vectors: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let vals = order.iter().map(|&i| values[i]).collect();
    let cols: Vec<DVector<Complex64>> = order.iter().map(|&i| vectors.column(i).into_owned()).collect();
    (vals, DMatrix::from_columns(&cols))
}

/// `‖A − V diag(values) V†‖_F`, one column at a time.
fn frobenius_residual(a: &DMatrix<Complex64>, values: &[f64], vectors: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let k = vectors.ncols();
    let mut coef = vec![Complex64::new(0.0, 0.0); k];
    let mut total = 0.0;
    for c in 0..n {
        for (j, slot) in coef.iter_mut().enumerate() {
            *slot = vectors[(c, j)].conj() * values[j];
        }
        let col = a.column(c);
        for r in 0..n {
            let mut v = col[r];
            for (j, cj) in coef.iter().enumerate() {
                v -= vectors[(r, j)] * cj;
            }
            total += v.norm_sqr();
        }
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn low_rank(n: usize, spectrum: &[f64]) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = DMatrix::from_fn(n, spectrum.len(), |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let q = orthonormalize(m);
        let scaled = DMatrix::from_fn(n, spectrum.len(), |r, c| q[(r, c)] * spectrum[c]);
        scaled * q.adjoint()
    }

    #[test]
    fn dense_recovers_known_spectrum() {
        let a = low_rank(30, &[0.7, 0.2, -0.1]);
        let e = dense_eigh(&a).unwrap();
        assert!((e.values[0] - 0.7).abs() < 1e-13);
        assert!((e.values[1] - 0.2).abs() < 1e-13);
        assert!((e.values[29] + 0.1).abs() < 1e-13);
        assert!(e.residual < 1e-12);
    }

    #[test]
    fn subspace_matches_dense_on_low_rank() {
        let spectrum = [0.6, 0.3, 0.05, -0.04, 1e-3];
        let a = low_rank(120, &spectrum);
        let s = subspace_eigh(&a, 7, 1e-13, 300).unwrap();
        let d = dense_eigh(&a).unwrap();
        for (i, want) in [0.6, 0.3, 0.05, 1e-3].iter().enumerate() {
            assert!((s.values[i] - want).abs() < 1e-12);
            assert!((d.values[i] - want).abs() < 1e-12);
        }
        assert!((s.values[6] + 0.04).abs() < 1e-12);
        assert!(s.residual < 1e-11);
    }

    #[test]
    fn subspace_reports_incomplete_block() {
        // rank 4 but only 2 vectors requested: the certificate must say so
        let a = low_rank(60, &[0.4, 0.3, 0.2, 0.1]);
        let res = subspace_eigh(&a, 2, 1e-13, 2000).unwrap();
        assert!(res.residual > 0.2);
    }
}
