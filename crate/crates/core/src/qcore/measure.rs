//! Born-rule sampling.

use nalgebra::DMatrix;
use rand::Rng;

use super::state::PureState;
use super::C64;
use crate::error::{Error, Result};
use crate::symcomb::qubit_mask;

pub const COMPLETENESS_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: usize,
    pub post_state: PureState,
    pub probability: f64,
}

/// Samples one outcome of a complete projective measurement given as dense
/// projectors, and collapses the state.
pub fn projective_measure<R: Rng + ?Sized>(
    state: &PureState,
    projectors: &[DMatrix<C64>],
    rng: &mut R,
) -> Result<Measurement> {
    let dim = state.dim();
    let mut total = DMatrix::<C64>::zeros(dim, dim);
    for p in projectors {
        if p.nrows() != dim || p.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.nrows(),
            });
        }
        total += p;
    }
    let defect = (total - DMatrix::<C64>::identity(dim, dim))
        .iter()
        .fold(0.0f64, |m, v| m.max(v.norm()));
    if defect > COMPLETENESS_TOLERANCE {
        return Err(Error::IncompleteProjectors { defect });
    }
    let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
    let branches: Vec<_> = projectors.iter().map(|p| p * &psi).collect();
    let probs: Vec<f64> = branches.iter().map(|b| b.norm_squared()).collect();
    let outcome = sample_index(&probs, rng);
    let post = PureState::normalized(state.qubits(), branches[outcome].iter().copied().collect())?;
    Ok(Measurement {
        outcome,
        post_state: post,
        probability: probs[outcome],
    })
}

/// Draws an index with the given (approximately normalized) weights.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    // rounding: fall back to the last outcome with nonzero weight
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Measures qubit `q` in the orthonormal basis `{|b>, |b_perp>}` where
/// `|b> = basis0[0]|0> + basis0[1]|1>`. Outcome 0 means `|b>`. The state is
/// collapsed in place; the outcome probability is returned.
pub fn measure_qubit<R: Rng + ?Sized>(
    state: &mut PureState,
    q: usize,
    basis0: [C64; 2],
    rng: &mut R,
) -> (u8, f64) {
    let norm = (basis0[0].norm_sqr() + basis0[1].norm_sqr()).sqrt();
    let b0 = [basis0[0] / norm, basis0[1] / norm];
    let b1 = [-b0[1].conj(), b0[0].conj()];
    let mask = qubit_mask(q, state.qubits()) as usize;
    let amps = state.amplitudes();
    let mut p0 = 0.0;
    for x in (0..amps.len()).filter(|x| x & mask == 0) {
        let c = b0[0].conj() * amps[x] + b0[1].conj() * amps[x | mask];
        p0 += c.norm_sqr();
    }
    let p0 = p0.clamp(0.0, 1.0);
    let outcome = u8::from(rng.random::<f64>() >= p0);
    let b = if outcome == 0 { b0 } else { b1 };
    let amps = state.amplitudes_mut();
    for x in (0..amps.len()).filter(|x| x & mask == 0) {
        let c = b[0].conj() * amps[x] + b[1].conj() * amps[x | mask];
        amps[x] = b[0] * c;
        amps[x | mask] = b[1] * c;
    }
    state.renormalize();
    (outcome, if outcome == 0 { p0 } else { 1.0 - p0 })
}

/// Computational-basis measurement of qubit `q`; the outcome is the bit value.
pub fn measure_z<R: Rng + ?Sized>(state: &mut PureState, q: usize, rng: &mut R) -> u8 {
    measure_qubit(state, q, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)], rng).0
}

/// Pauli-X measurement of qubit `q`; outcome 0 is `|+>`.
pub fn measure_x<R: Rng + ?Sized>(state: &mut PureState, q: usize, rng: &mut R) -> u8 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    measure_qubit(state, q, [C64::new(h, 0.0), C64::new(h, 0.0)], rng).0
}
