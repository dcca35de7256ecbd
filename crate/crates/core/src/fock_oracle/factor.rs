use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ops::{loss_weights, phase_shift_vector, LossModes};
use super::space::{ecs_fock, FockOperator, FockVector};
use crate::channels::LossScenario;
use crate::states::ProbeSpec;
use crate::{Error, Result};

/// Kraus images whose squared norm falls below this are dropped (and accounted for).
pub const PRUNE_WEIGHT: f64 = 1e-30;

/// Unresolved trace weight at which the range finder stops adding power steps.
pub const RANGE_TARGET: f64 = 1e-15;

const SEED: u64 = 0xfac7_0125;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `ρ = ΦΦ†` with the columns of `Φ` the Kraus images `(K_k ⊗ K_l)|ψ⟩` of a pure state.
///
/// Applying `ρ` costs two passes over `Φ` and the dense `ρ` is never formed.
#[derive(Debug, Clone)]
pub struct KrausFactor {
    cutoff: usize,
    columns: Vec<DVector<Complex64>>,
    pruned: f64,
}

impl KrausFactor {
    pub fn from_pure(psi: &FockVector, rate: f64, modes: LossModes) -> Self {
        let cutoff = psi.cutoff();
        let d = cutoff + 1;
        if rate == 0.0 {
            return Self { cutoff, columns: vec![psi.amplitudes().clone()], pruned: 0.0 };
        }
        let w = loss_weights(rate, cutoff);
        let (ka, kb) = match modes {
            LossModes::A => (d, 1),
            LossModes::B => (1, d),
            LossModes::Both => (d, d),
        };
        let on_a = ka > 1;
        let on_b = kb > 1;
        let src = psi.amplitudes();
        let mut columns = Vec::new();
        let mut pruned = 0.0;
        for k in 0..ka {
            for l in 0..kb {
                let mut col = DVector::from_element(d * d, ZERO);
                for n in 0..d - k {
                    let wa = if on_a { w[n][k] } else { 1.0 };
                    if wa == 0.0 {
                        continue;
                    }
                    for x in 0..d - l {
                        let wb = if on_b { w[x][l] } else { 1.0 };
                        col[n * d + x] = src[(n + k) * d + x + l] * (wa * wb);
                    }
                }
                let weight = col.norm_squared();
                if weight <= PRUNE_WEIGHT {
                    pruned += weight;
                } else {
                    columns.push(col);
                }
            }
        }
        Self { cutoff, columns, pruned }
    }

    /// Output state of a probe: phase on mode `a`, then loss.
    pub fn output(p: &ProbeSpec, s: &LossScenario, cutoff: usize) -> Result<Self> {
        let psi = phase_shift_vector(&ecs_fock(p, cutoff)?, s.phase());
        Ok(Self::from_pure(&psi, s.rate(), s.model().into()))
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// The Kraus images `Φ` (pruned columns excluded).
    pub fn columns(&self) -> &[DVector<Complex64>] {
        &self.columns
    }

    pub fn rank_bound(&self) -> usize {
        self.columns.len()
    }

    /// Trace weight of the dropped Kraus images.
    pub fn pruned_weight(&self) -> f64 {
        self.pruned
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::from_element(v.len(), ZERO);
        for col in &self.columns {
            let c = col.dotc(v);
            out.axpy(c, col, Complex64::from(1.0));
        }
        out
    }

    /// Dense `ΦΦ†`; only sensible for small cutoffs.
    pub fn to_operator(&self) -> FockOperator {
        let dim = (self.cutoff + 1).pow(2);
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for col in &self.columns {
            m.ger(Complex64::from(1.0), col, &col.conjugate(), Complex64::from(1.0));
        }
        FockOperator::from_matrix(self.cutoff, m)
    }

    /// Leading eigenpairs of `ρ` by a randomized range finder on `Φ`.
    ///
    /// At least one power step is taken: the range is only captured to an
    /// angle of about `√residual` by the first sketch.
    ///
    /// `residual` is `‖(1 − QQ†)Φ‖_F² + pruned`, the trace weight of `ρ` outside
    /// the resolved subspace; every eigenvalue that was not returned is below it.
    pub fn spectrum(&self, block: usize) -> Result<FactorSpectrum> {
        let dim = (self.cutoff + 1).pow(2);
        let m = self.columns.len();
        let k = block.min(m).min(dim).max(1);
        let mut q = if m <= k {
            orthonormal_columns(DMatrix::from_columns(&self.columns))
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let mut y = DMatrix::from_element(dim, k, ZERO);
            for col in &self.columns {
                for j in 0..k {
                    let g = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    y.column_mut(j).axpy(g, col, Complex64::from(1.0));
                }
            }
            orthonormal_columns(y)
        };
        let mut attempt = 0;
        loop {
            let (b, tail) = self.project(&q);
            let residual = tail + self.pruned;
            if (attempt >= 1 && residual <= RANGE_TARGET) || attempt >= 4 || m <= k {
                let gram = &b * b.adjoint();
                let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 0)
                    .ok_or_else(|| Error::Eigen("projected Gram matrix did not converge".into()))?;
                let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
                order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
                let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
                let u = DMatrix::from_columns(
                    &order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>(),
                );
                return Ok(FactorSpectrum { values, vectors: &q * u, residual, passes: attempt + 1 });
            }
            // one power step: Q ← orth(ΦΦ†Q)
            let cols: Vec<DVector<Complex64>> = (0..q.ncols()).map(|j| self.apply(&q.column(j).into_owned())).collect();
            q = orthonormal_columns(DMatrix::from_columns(&cols));
            attempt += 1;
        }
    }

    /// `B = Q†Φ` and `‖(1 − QQ†)Φ‖_F²`, in one pass over the columns.
    fn project(&self, q: &DMatrix<Complex64>) -> (DMatrix<Complex64>, f64) {
        let k = q.ncols();
        let mut b = DMatrix::from_element(k, self.columns.len(), ZERO);
        let mut tail = 0.0;
        for (c, col) in self.columns.iter().enumerate() {
            let coeffs = q.ad_mul(col);
            let mut rest = col.clone();
            rest.gemv(Complex64::from(-1.0), q, &coeffs, Complex64::from(1.0));
            tail += rest.norm_squared();
            b.set_column(c, &coeffs);
        }
        (b, tail)
    }
}

/// Eigenpairs of `ΦΦ†` in the resolved subspace, sorted by decreasing value.
#[derive(Debug, Clone)]
pub struct FactorSpectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
    /// Trace weight outside the resolved subspace.
    pub residual: f64,
    pub passes: usize,
}

fn orthonormal_columns(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let k = m.ncols();
    m.qr().q().columns(0, k).into_owned()
}

/// Negativity of `Σ_j λ_j |x_j⟩⟨x_j|` after restriction to the local supports.
///
/// Each `|x_j⟩` is reshaped to a `d × d` coefficient matrix. Orthonormal bases
/// of the mode-`a` and mode-`b` supports are built from the stacked
/// coefficient matrices by pivoted Gram-Schmidt; the state is mapped into their tensor product by a
/// local isometry (which leaves the partial-transpose spectrum unchanged) and
/// the partial transpose is diagonalized densely there.
pub fn negativity_on_support(values: &[f64], vectors: &DMatrix<Complex64>, cutoff: usize, floor: f64) -> Result<f64> {
    let d = cutoff + 1;
    let r = values.len();
    if r == 0 {
        return Ok(0.0);
    }
    let coeff = |j: usize| DMatrix::from_fn(d, d, |na, nb| vectors[(na * d + nb, j)]);
    let mut stacked_a = DMatrix::from_element(d, d * r, ZERO);
    let mut stacked_b = DMatrix::from_element(d, d * r, ZERO);
    let mats: Vec<DMatrix<Complex64>> = (0..r).map(coeff).collect();
    for (j, m) in mats.iter().enumerate() {
        stacked_a.columns_mut(j * d, d).copy_from(m);
        stacked_b.columns_mut(j * d, d).copy_from(&m.transpose());
    }
    let qa = support_basis(stacked_a, floor)?;
    let qb = support_basis(stacked_b, floor)?;
    let (ra, rb) = (qa.ncols(), qb.ncols());
    // reduced coefficient matrices  Qa† M Qb*
    let small: Vec<DMatrix<Complex64>> = mats.iter().map(|m| qa.adjoint() * m * qb.conjugate()).collect();
    let dim = ra * rb;
    let mut rho = DMatrix::from_element(dim, dim, ZERO);
    for (lam, m) in values.iter().zip(&small) {
        let v = DVector::from_fn(dim, |i, _| m[(i / rb, i % rb)]);
        rho.ger(Complex64::from(*lam), &v, &v.conjugate(), Complex64::from(1.0));
    }
    let pt = DMatrix::from_fn(dim, dim, |row, col| {
        let (n, x) = (row / rb, row % rb);
        let (m, y) = (col / rb, col % rb);
        rho[(m * rb + x, n * rb + y)]
    });
    let h = (&pt + pt.adjoint()) * Complex64::from(0.5);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("reduced partial transpose did not converge".into()))?;
    Ok(eig.eigenvalues.iter().filter(|&&v| v < 0.0).map(|v| -v).sum())
}

/// Column-pivoted Gram-Schmidt with one reorthogonalization pass. Stops once
/// every remaining column is below `floor` times the largest input column.
fn support_basis(m: DMatrix<Complex64>, floor: f64) -> Result<DMatrix<Complex64>> {
    let mut cols: Vec<DVector<Complex64>> = m.column_iter().map(|c| c.into_owned()).collect();
    let scale = cols.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    if scale == 0.0 {
        return Err(Error::DegenerateSupport);
    }
    while basis.len() < m.nrows() {
        let (pivot, norm) =
            cols.iter()
                .enumerate()
                .map(|(i, c)| (i, c.norm()))
                .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if norm <= floor * scale {
            break;
        }
        let mut q = cols.swap_remove(pivot);
        for b in &basis {
            let c = b.dotc(&q);
            q.axpy(-c, b, Complex64::from(1.0));
        }
        let n = q.norm();
        if n <= floor * scale {
            continue;
        }
        q.unscale_mut(n);
        for c in cols.iter_mut() {
            let h = q.dotc(c);
            c.axpy(-h, &q, Complex64::from(1.0));
        }
        basis.push(q);
    }
    Ok(DMatrix::from_columns(&basis))
}
