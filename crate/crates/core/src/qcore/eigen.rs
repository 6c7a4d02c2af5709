//! Numeric eigenvalues of Hermitian operators: dense diagonalization for
//! small problems, shifted power iteration with deflation above that.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::rng::RngStream;
use super::C64;
use crate::error::{invalid, Error, Result};
use crate::sparse::CsrMatrix;

pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

pub trait HermitianOperator {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[C64]) -> Vec<C64>;

    /// Upper bound on the spectral radius.
    fn norm_bound(&self) -> f64;

    fn to_dense(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        let mut e = vec![C64::new(0.0, 0.0); d];
        for j in 0..d {
            e[j] = C64::new(1.0, 0.0);
            for (i, v) in self.apply(&e).into_iter().enumerate() {
                m[(i, j)] = v;
            }
            e[j] = C64::new(0.0, 0.0);
        }
        m
    }

    /// `max |A - A^dagger|`, or a randomized probe estimate for large operators.
    fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        if d <= 2048 {
            let m = self.to_dense();
            return (&m - m.adjoint()).iter().fold(0.0, |acc, v| acc.max(v.norm()));
        }
        let mut rng = RngStream::new(0x5eed).rng();
        let mut worst = 0.0f64;
        for _ in 0..4 {
            let x = random_vector(d, &mut rng);
            let y = random_vector(d, &mut rng);
            let lhs = dot(&x, &self.apply(&y));
            let rhs = dot(&self.apply(&x), &y);
            worst = worst.max((lhs - rhs).norm());
        }
        worst
    }
}

impl HermitianOperator for DMatrix<C64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        (self * nalgebra::DVector::from_column_slice(x)).iter().copied().collect()
    }

    fn norm_bound(&self) -> f64 {
        self.row_iter()
            .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn to_dense(&self) -> DMatrix<C64> {
        self.clone()
    }
}

impl HermitianOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| x[j] * self[(i, j)]).sum())
            .collect()
    }

    fn norm_bound(&self) -> f64 {
        self.row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn to_dense(&self) -> DMatrix<C64> {
        self.map(|v| C64::new(v, 0.0))
    }
}

impl HermitianOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.matvec_complex(x)
    }

    fn norm_bound(&self) -> f64 {
        self.max_row_sum()
    }

    fn to_dense(&self) -> DMatrix<C64> {
        CsrMatrix::to_dense(self).map(|v| C64::new(v, 0.0))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EigOptions {
    /// Largest dimension diagonalized densely.
    pub dense_limit: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            dense_limit: 2048,
            tolerance: 1e-10,
            max_iterations: 100_000,
            seed: 0x00e1_6e2f,
        }
    }
}

/// The two largest eigenvalues `(l1, l2)`, `l1 >= l2`.
pub fn eig_top2<O: HermitianOperator + ?Sized>(op: &O) -> Result<(f64, f64)> {
    eig_top2_with(op, &EigOptions::default())
}

pub fn eig_top2_with<O: HermitianOperator + ?Sized>(op: &O, opts: &EigOptions) -> Result<(f64, f64)> {
    let d = op.dim();
    if d < 2 {
        return Err(invalid("operator", "needs dimension at least 2"));
    }
    let defect = op.hermiticity_defect();
    if defect > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { defect });
    }
    if d <= opts.dense_limit {
        let vals = dense_eigenvalues_desc(&op.to_dense());
        return Ok((vals[0], vals[1]));
    }
    let mut rng = RngStream::new(opts.seed).rng();
    let (l1, v1) = power_iteration(op, &[], opts, &mut rng)?;
    let (l2, _) = power_iteration(op, &[v1], opts, &mut rng)?;
    Ok((l1, l2.min(l1)))
}

/// Full spectrum of a Hermitian matrix, largest first.
pub fn dense_eigenvalues_desc(m: &DMatrix<C64>) -> Vec<f64> {
    let mut vals: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Full spectrum of a real symmetric matrix, largest first.
pub fn symmetric_eigenvalues_desc(m: &DMatrix<f64>) -> Vec<f64> {
    let mut vals: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

fn power_iteration<O: HermitianOperator + ?Sized, R: Rng>(
    op: &O,
    deflate: &[Vec<C64>],
    opts: &EigOptions,
    rng: &mut R,
) -> Result<(f64, Vec<C64>)> {
    let d = op.dim();
    // shift so that A + sI is positive semidefinite
    let shift = op.norm_bound();
    let mut v = random_vector(d, rng);
    orthogonalize(&mut v, deflate);
    normalize(&mut v);
    let mut mu_prev = f64::INFINITY;
    // Rayleigh-quotient error is about residual^2 / gap, so this is ample
    // even for gaps well below one
    let residual_tol = opts.tolerance.sqrt() * 1e-3 * shift.max(1.0);
    for _ in 0..opts.max_iterations {
        let av = op.apply(&v);
        let mu = dot(&v, &av).re;
        let residual = av
            .iter()
            .zip(&v)
            .map(|(a, x)| (a - x * mu).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual <= residual_tol && (mu - mu_prev).abs() <= opts.tolerance * 0.1 {
            return Ok((mu, v));
        }
        mu_prev = mu;
        let mut w: Vec<C64> = av.iter().zip(&v).map(|(a, x)| a + x * shift).collect();
        orthogonalize(&mut w, deflate);
        if normalize(&mut w) == 0.0 {
            return Ok((-shift, v));
        }
        v = w;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
    })
}

fn random_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    (0..d)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn normalize(v: &mut [C64]) -> f64 {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
    n
}

fn orthogonalize(v: &mut [C64], basis: &[Vec<C64>]) {
    for b in basis {
        let c = dot(b, v);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= y * c);
    }
}
