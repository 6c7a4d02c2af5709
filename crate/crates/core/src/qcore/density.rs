//! Mixed states as dense matrices. Only used where a channel forces mixing;
//! Monte-Carlo runs use pure-state trajectories instead.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use super::measure::sample_index;
use super::state::PureState;
use super::C64;
use crate::error::{invalid, Error, Result};
use crate::symcomb::qubit_mask;

pub const MAX_DENSITY_QUBITS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    qubits: usize,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    pub fn from_pure(psi: &PureState) -> Result<Self> {
        check_size(psi.qubits())?;
        let v = DVector::from_column_slice(psi.amplitudes());
        Ok(Self {
            qubits: psi.qubits(),
            matrix: &v * v.adjoint(),
        })
    }

    /// Validates trace, Hermiticity and positivity.
    pub fn from_matrix(qubits: usize, matrix: DMatrix<C64>) -> Result<Self> {
        check_size(qubits)?;
        let d = 1usize << qubits;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        let rho = Self { qubits, matrix };
        rho.validate()?;
        Ok(rho)
    }

    /// Convex combination `sum w_i |psi_i><psi_i|`.
    pub fn mixture(parts: &[(f64, PureState)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| invalid("parts", "empty mixture"))?;
        let qubits = first.1.qubits();
        check_size(qubits)?;
        let d = 1usize << qubits;
        let mut matrix = DMatrix::zeros(d, d);
        for (w, psi) in parts {
            if *w < 0.0 || psi.qubits() != qubits {
                return Err(invalid("parts", "weights must be non-negative over one register"));
            }
            let v = DVector::from_column_slice(psi.amplitudes());
            matrix += (&v * v.adjoint()) * C64::new(*w, 0.0);
        }
        Self::from_matrix(qubits, matrix)
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-12 {
            return Err(invalid("density", format!("trace {tr} is not 1")));
        }
        let defect = (&self.matrix - self.matrix.adjoint())
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.norm()));
        if defect > 1e-10 {
            return Err(Error::NotHermitian { defect });
        }
        let min = self.eigen().0.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(invalid("density", format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.matrix
    }

    pub(crate) fn from_raw(qubits: usize, matrix: DMatrix<C64>) -> Self {
        Self { qubits, matrix }
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr(rho A)` for a Hermitian `A`.
    pub fn expectation(&self, a: &DMatrix<C64>) -> f64 {
        (&self.matrix * a).trace().re
    }

    /// `<psi|rho|psi>`.
    pub fn fidelity(&self, psi: &PureState) -> f64 {
        let v = DVector::from_column_slice(psi.amplitudes());
        (v.adjoint() * &self.matrix * &v)[(0, 0)].re
    }

    fn eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let e = SymmetricEigen::new(self.matrix.clone());
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    }

    /// Draws a pure state from the spectral decomposition.
    pub fn sample_pure<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PureState> {
        let (vals, vecs) = self.eigen();
        let weights: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
        let i = sample_index(&weights, rng);
        PureState::normalized(self.qubits, vecs.column(i).iter().copied().collect())
    }

    /// `K rho K^dagger` for a 2x2 `K` on qubit `q`.
    pub(crate) fn conjugate_local(&self, q: usize, k: &[[C64; 2]; 2]) -> DMatrix<C64> {
        let d = self.matrix.nrows();
        let mask = qubit_mask(q, self.qubits) as usize;
        let mut out = self.matrix.clone();
        // rows: K acting on the row index
        for c in 0..d {
            for r in 0..d {
                if r & mask == 0 {
                    let (a0, a1) = (out[(r, c)], out[(r | mask, c)]);
                    out[(r, c)] = k[0][0] * a0 + k[0][1] * a1;
                    out[(r | mask, c)] = k[1][0] * a0 + k[1][1] * a1;
                }
            }
        }
        // columns: multiply by K^dagger on the right
        for r in 0..d {
            for c in 0..d {
                if c & mask == 0 {
                    let (a0, a1) = (out[(r, c)], out[(r, c | mask)]);
                    out[(r, c)] = a0 * k[0][0].conj() + a1 * k[0][1].conj();
                    out[(r, c | mask)] = a0 * k[1][0].conj() + a1 * k[1][1].conj();
                }
            }
        }
        out
    }
}

fn check_size(qubits: usize) -> Result<()> {
    if qubits == 0 || qubits > MAX_DENSITY_QUBITS {
        return Err(Error::TooLarge {
            size: qubits,
            limit: MAX_DENSITY_QUBITS,
        });
    }
    Ok(())
}
