use rand::Rng;
use rand_distr::StandardNormal;

use super::{C64, MAX_DENSE_QUBITS};
use crate::error::{invalid, Error, Result};
use crate::symcomb::{binom_f64, qubit_mask, WeightBasis};

/// Normalized amplitude vector over `qubits` qubits.
///
/// Index `x` is the computational basis string with qubit 0 as the most
/// significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    qubits: usize,
    amps: Vec<C64>,
}

pub const NORM_TOLERANCE: f64 = 1e-12;

impl PureState {
    pub fn from_amplitudes(qubits: usize, amps: Vec<C64>) -> Result<Self> {
        check_qubits(qubits)?;
        if amps.len() != 1 << qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << qubits,
                found: amps.len(),
            });
        }
        let state = Self { qubits, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(invalid("amplitudes", format!("norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// Normalizes `amps`; fails on the zero vector.
    pub fn normalized(qubits: usize, amps: Vec<C64>) -> Result<Self> {
        check_qubits(qubits)?;
        if amps.len() != 1 << qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << qubits,
                found: amps.len(),
            });
        }
        let mut state = Self { qubits, amps };
        let norm = state.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("amplitudes", "cannot normalize a zero vector"));
        }
        state.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    pub fn basis(qubits: usize, index: u64) -> Result<Self> {
        check_qubits(qubits)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << qubits];
        *amps
            .get_mut(index as usize)
            .ok_or_else(|| invalid("index", "outside the register"))? = C64::new(1.0, 0.0);
        Ok(Self { qubits, amps })
    }

    /// Haar-random state.
    pub fn random<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> Result<Self> {
        let amps = (0..1usize << qubits)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(qubits, amps)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn renormalize(&mut self) {
        let n = self.norm();
        self.amps.iter_mut().for_each(|a| *a /= n);
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Applies a 2x2 matrix (row-major) to qubit `q`.
    pub fn apply_single(&mut self, q: usize, m: [[C64; 2]; 2]) {
        let mask = qubit_mask(q, self.qubits) as usize;
        for x in 0..self.amps.len() {
            if x & mask == 0 {
                let (a0, a1) = (self.amps[x], self.amps[x | mask]);
                self.amps[x] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[x | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// Pauli X on every listed qubit.
    pub fn apply_x(&mut self, qubits: &[usize]) {
        let flip = qubits.iter().fold(0usize, |acc, &q| acc | qubit_mask(q, self.qubits) as usize);
        let old = self.amps.clone();
        for (x, a) in old.into_iter().enumerate() {
            self.amps[x ^ flip] = a;
        }
    }

    /// Pauli Z on qubit `q`.
    pub fn apply_z(&mut self, q: usize) {
        let mask = qubit_mask(q, self.qubits) as usize;
        for (x, a) in self.amps.iter_mut().enumerate() {
            if x & mask != 0 {
                *a = -*a;
            }
        }
    }

    /// Linear combination `alpha*self + beta*other`, normalized.
    pub fn superpose(&self, alpha: C64, other: &Self, beta: C64) -> Result<Self> {
        let amps = self.amps.iter().zip(&other.amps).map(|(a, b)| alpha * a + beta * b).collect();
        Self::normalized(self.qubits, amps)
    }
}

fn check_qubits(qubits: usize) -> Result<()> {
    if qubits == 0 || qubits > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge {
            size: qubits,
            limit: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// `(|0^m> + |1^m>)/sqrt 2`.
pub fn make_ghz(m: usize) -> Result<PureState> {
    if m < 2 {
        return Err(invalid("m", "GHZ state needs at least 2 qubits"));
    }
    ghz_like(m, 0.5)
}

/// `sqrt(l0)|0^m> + sqrt(1-l0)|1^m>`.
pub fn ghz_like(m: usize, lambda0: f64) -> Result<PureState> {
    if !(0.0..=1.0).contains(&lambda0) {
        return Err(invalid("lambda0", format!("{lambda0} not in [0,1]")));
    }
    check_qubits(m)?;
    let mut amps = vec![C64::new(0.0, 0.0); 1 << m];
    amps[0] = C64::new(lambda0.sqrt(), 0.0);
    amps[(1 << m) - 1] += C64::new((1.0 - lambda0).sqrt(), 0.0);
    PureState::from_amplitudes(m, amps)
}

/// Uniform superposition over all `m`-bit strings of weight `k`.
pub fn make_dicke(m: usize, k: usize) -> Result<PureState> {
    check_qubits(m)?;
    let basis = WeightBasis::new(m, k)?;
    let amp = C64::new(1.0 / binom_f64(m as u64, k as u64).sqrt(), 0.0);
    let mut amps = vec![C64::new(0.0, 0.0); 1 << m];
    for x in basis.iter() {
        amps[x as usize] = amp;
    }
    PureState::from_amplitudes(m, amps)
}

/// Sensing resource `sqrt(q0)|GHZ_2n> + sqrt(q1)|D_2n^n>`.
pub fn make_target(n: usize, q0: f64) -> Result<PureState> {
    check_target(n, q0)?;
    let ghz = make_ghz(2 * n)?;
    let dicke = make_dicke(2 * n, n)?;
    ghz.superpose(C64::new(q0.sqrt(), 0.0), &dicke, C64::new((1.0 - q0).sqrt(), 0.0))
}

/// The in-plane complement `sqrt(q1)|GHZ> - sqrt(q0)|D>` of [`make_target`].
pub fn make_target_complement(n: usize, q0: f64) -> Result<PureState> {
    check_target(n, q0)?;
    let ghz = make_ghz(2 * n)?;
    let dicke = make_dicke(2 * n, n)?;
    ghz.superpose(C64::new((1.0 - q0).sqrt(), 0.0), &dicke, C64::new(-q0.sqrt(), 0.0))
}

pub(crate) fn check_target(n: usize, q0: f64) -> Result<()> {
    if n < 3 {
        return Err(invalid("n", format!("need at least 6 participants, got 2n = {}", 2 * n)));
    }
    if !(q0 > 0.0 && q0 < 1.0) {
        return Err(invalid("q0", format!("{q0} not in (0,1)")));
    }
    Ok(())
}

/// Evolution under `sum_i (omega_i/2) Z_i` for time `t`.
pub fn evolve_phases(state: &PureState, omegas: &[f64], t: f64) -> Result<PureState> {
    if omegas.len() != state.qubits() {
        return Err(Error::DimensionMismatch {
            expected: state.qubits(),
            found: omegas.len(),
        });
    }
    if let Some(w) = omegas.iter().find(|w| !(**w >= 0.0)) {
        return Err(invalid("omega", format!("{w} is negative")));
    }
    let m = state.qubits();
    let mut out = state.clone();
    for (x, a) in out.amplitudes_mut().iter_mut().enumerate() {
        // exp(-i w t/2) on |0>, exp(+i w t/2) on |1>
        let phase: f64 = omegas
            .iter()
            .enumerate()
            .map(|(q, w)| {
                let sign = if x as u64 & qubit_mask(q, m) != 0 { 1.0 } else { -1.0 };
                sign * w * t / 2.0
            })
            .sum();
        *a *= C64::from_polar(1.0, phase);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcomb::sector_projector;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn ghz_two_qubits() {
        let g = make_ghz(2).unwrap();
        let want = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
        for (a, w) in g.amplitudes().iter().zip(want) {
            assert!(close(*a, C64::new(w, 0.0)));
        }
        assert!(make_ghz(1).is_err());
        let g6 = make_ghz(6).unwrap();
        assert!((g6.norm() - 1.0).abs() < NORM_TOLERANCE);
        let z0 = sector_projector(6, &[0, 1, 2, 3, 4, 5], 0);
        let p: f64 = g6
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(x, _)| z0.contains(*x as u64))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dicke_two_one() {
        let d = make_dicke(2, 1).unwrap();
        let want = [0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0];
        for (a, w) in d.amplitudes().iter().zip(want) {
            assert!(close(*a, C64::new(w, 0.0)));
        }
        assert!(make_dicke(3, 4).is_err());
    }

    #[test]
    fn target_fidelities() {
        let t = make_target(3, 0.33).unwrap();
        assert!((t.fidelity(&make_ghz(6).unwrap()) - 0.33).abs() < 1e-14);
        assert!((t.fidelity(&make_dicke(6, 3).unwrap()) - 0.67).abs() < 1e-14);
        let c = make_target_complement(3, 0.33).unwrap();
        assert!(t.inner(&c).norm() < 1e-15);
        for n in 3..=6 {
            for q0 in [0.05, 0.33, 0.5, 0.95] {
                assert!((make_target(n, q0).unwrap().norm() - 1.0).abs() < NORM_TOLERANCE);
            }
        }
        assert!(make_target(2, 0.3).is_err());
        assert!(make_target(3, 1.0).is_err());
        assert!(make_target(3, 0.0).is_err());
    }

    #[test]
    fn phase_evolution_examples() {
        let g = make_ghz(6).unwrap();
        let same = evolve_phases(&g, &[0.0; 6], 3.0).unwrap();
        assert_eq!(same, g);

        let plus = make_ghz(2).unwrap();
        let _ = plus;
        let s = PureState::from_amplitudes(1, vec![C64::new(FRAC_1_SQRT_2, 0.0); 2]).unwrap();
        let out = evolve_phases(&s, &[PI], 1.0).unwrap();
        let minus = PureState::from_amplitudes(
            1,
            vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)],
        )
        .unwrap();
        assert!((out.fidelity(&minus) - 1.0).abs() < 1e-14);

        // omega_1 t = omega_4 t = pi/2 on GHZ_6: overlap with GHZ is (1 + cos pi)/2 = 0
        let mut w = [0.0; 6];
        w[0] = PI / 2.0;
        w[3] = PI / 2.0;
        let e = evolve_phases(&g, &w, 1.0).unwrap();
        assert!(g.fidelity(&e) < 1e-15);
        assert!(evolve_phases(&g, &[0.0; 5], 1.0).is_err());
        assert!(evolve_phases(&g, &[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1.0).is_err());
    }
}
