//! Anonymous sensing: two of the `2n` sensors pick up phases and a symmetric
//! POVM reveals `theta+ = (w1 + w2) t` and `theta- = (w1 - w2) t` without
//! revealing which two.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qcore::eigen::dense_eigenvalues_desc;
use crate::qcore::state::{check_target, evolve_phases, make_dicke, make_ghz, make_target, PureState};
use crate::qcore::C64;

/// Tolerance for the position-invariance audit.
pub const AUDIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingScenario {
    pub n: usize,
    pub q0: f64,
    /// 1-based positions of the two sensors that see a field.
    pub t1: usize,
    pub t2: usize,
    /// Frequencies at `t1` and `t2`, rad/s.
    pub omega_a: f64,
    pub omega_b: f64,
    /// Interaction time, s.
    pub t: f64,
}

impl SensingScenario {
    pub fn new(n: usize, q0: f64, t1: usize, t2: usize, omega_a: f64, omega_b: f64, t: f64) -> Result<Self> {
        let s = Self {
            n,
            q0,
            t1,
            t2,
            omega_a,
            omega_b,
            t,
        };
        s.validate()?;
        Ok(s)
    }

    /// Scenario with `t = 1` and sensors 1, 2 realising the given angles.
    pub fn from_angles(n: usize, q0: f64, theta_plus: f64, theta_minus: f64) -> Result<Self> {
        Self::new(
            n,
            q0,
            1,
            2,
            (theta_plus + theta_minus) / 2.0,
            (theta_plus - theta_minus) / 2.0,
            1.0,
        )
    }

    pub fn validate(&self) -> Result<()> {
        check_target(self.n, self.q0)?;
        let m = 2 * self.n;
        if self.t1 == self.t2 || !(1..=m).contains(&self.t1) || !(1..=m).contains(&self.t2) {
            return Err(invalid("positions", format!("need distinct t1, t2 in 1..={m}")));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(invalid("t", "interaction time must be positive"));
        }
        let cap = PI / (2.0 * self.t) * (1.0 + 1e-12);
        if !(0.0 < self.omega_a && self.omega_a < self.omega_b && self.omega_b <= cap) {
            return Err(invalid("omega", "need 0 < omega_a < omega_b <= pi/(2t)"));
        }
        Ok(())
    }

    pub fn theta_plus(&self) -> f64 {
        (self.omega_a + self.omega_b) * self.t
    }

    pub fn theta_minus(&self) -> f64 {
        (self.omega_a - self.omega_b) * self.t
    }

    /// Per-qubit frequencies, zero away from `t1`, `t2`.
    pub fn omegas(&self) -> Vec<f64> {
        let mut w = vec![0.0; 2 * self.n];
        w[self.t1 - 1] = self.omega_a;
        w[self.t2 - 1] = self.omega_b;
        w
    }

    pub fn with_positions(&self, t1: usize, t2: usize) -> Result<Self> {
        Self::new(self.n, self.q0, t1, t2, self.omega_a, self.omega_b, self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub p: [f64; 4],
}

impl OutcomeDistribution {
    pub fn p1(&self) -> f64 {
        self.p[0]
    }
    pub fn p2(&self) -> f64 {
        self.p[1]
    }
    pub fn p3(&self) -> f64 {
        self.p[2]
    }
    pub fn p4(&self) -> f64 {
        self.p[3]
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Empirical frequencies.
    pub fn from_counts(counts: &[u64; 4]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(invalid("counts", "no shots"));
        }
        Ok(Self {
            p: counts.map(|c| c as f64 / total as f64),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityBound {
    pub g_plus: f64,
    pub g_minus: f64,
}

/// Four-outcome measurement: three rank-one projectors and the remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    n: usize,
    vectors: [PureState; 3],
    /// The first two vectors are still the GHZ pair spanning `|0..0>, |1..1>`.
    ghz_pair: bool,
}

pub fn build_povm(n: usize) -> Result<Povm> {
    if n < 3 {
        return Err(invalid("n", "need n >= 3"));
    }
    let m = 2 * n;
    let ghz = make_ghz(m)?;
    let mut flipped = ghz.clone();
    flipped.apply_z(0);
    Ok(Povm {
        n,
        vectors: [ghz, flipped, make_dicke(m, n)?],
        ghz_pair: true,
    })
}

impl Povm {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Replaces the projector for outcome `j` (0-based, `j < 3`). The
    /// vectors must stay orthonormal for `E4` to remain positive.
    pub fn with_projector(mut self, j: usize, v: PureState) -> Result<Self> {
        if j >= 3 || v.qubits() != 2 * self.n {
            return Err(invalid("projector", "bad outcome index or register size"));
        }
        self.vectors[j] = v;
        self.ghz_pair &= j == 2;
        let defect = self.orthonormality_defect();
        if defect > 1e-12 {
            return Err(invalid("projector", format!("projectors not orthogonal ({defect:e})")));
        }
        Ok(self)
    }

    pub fn vectors(&self) -> &[PureState; 3] {
        &self.vectors
    }

    /// `max |<v_i|v_j> - delta_ij|`; zero iff `E4 = I - sum E` is a projector.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.vectors[i].inner(&self.vectors[j]) - want).norm());
            }
        }
        worst
    }

    /// Dense `E^(j)`, `j` 0-based.
    pub fn element(&self, j: usize) -> DMatrix<C64> {
        let d = 1usize << (2 * self.n);
        let proj = |v: &PureState| {
            let x = DVector::from_column_slice(v.amplitudes());
            &x * x.adjoint()
        };
        if j < 3 {
            proj(&self.vectors[j])
        } else {
            let mut e4 = DMatrix::identity(d, d);
            for v in &self.vectors {
                e4 -= proj(v);
            }
            e4
        }
    }

    /// Smallest eigenvalue of `E4` by dense diagonalization.
    pub fn e4_min_eigenvalue(&self) -> f64 {
        *dense_eigenvalues_desc(&self.element(3)).last().expect("nonempty")
    }

    pub fn probabilities(&self, psi: &PureState) -> OutcomeDistribution {
        let mut p = [0.0; 4];
        // E4 = I - sum of projectors, evaluated on the residual vector. The GHZ
        // pair projects exactly onto |0..0>, |1..1>, so those amplitudes are
        // dropped rather than subtracted; a GHZ input then gives exactly zero.
        let mut residual = psi.amplitudes().to_vec();
        let last = residual.len() - 1;
        for (j, (pj, v)) in p.iter_mut().zip(&self.vectors).enumerate() {
            let c = v.inner(psi);
            *pj = c.norm_sqr();
            if self.ghz_pair && j < 2 {
                residual[0] = C64::new(0.0, 0.0);
                residual[last] = C64::new(0.0, 0.0);
                continue;
            }
            for (r, a) in residual.iter_mut().zip(v.amplitudes()) {
                *r -= a * c;
            }
        }
        p[3] = residual.iter().map(|r| r.norm_sqr()).sum();
        OutcomeDistribution { p }
    }
}

/// Closed-form outcome probabilities. `q0 = 1` is allowed and models an
/// initial state that collapsed to pure GHZ.
pub fn analytic_probs(n: usize, q0: f64, theta_plus: f64, theta_minus: f64) -> Result<OutcomeDistribution> {
    if n < 3 {
        return Err(invalid("n", "need n >= 3"));
    }
    if !(q0 > 0.0 && q0 <= 1.0) {
        return Err(invalid("q0", format!("{q0} not in (0,1]")));
    }
    let q1 = 1.0 - q0;
    let nf = n as f64;
    let p1 = q0 * (1.0 + theta_plus.cos()) / 2.0;
    let p2 = q0 * (1.0 - theta_plus.cos()) / 2.0;
    let amp = ((nf - 1.0) * (theta_plus / 2.0).cos() + nf * (theta_minus / 2.0).cos()) / (2.0 * nf - 1.0);
    let p3 = q1 * amp * amp;
    Ok(OutcomeDistribution {
        p: [p1, p2, p3, q1 * (1.0 - amp * amp)],
    })
}

/// Exact probabilities from the state vector.
pub fn simulate_probs(s: &SensingScenario) -> Result<OutcomeDistribution> {
    simulate_probs_with(s, &make_target(s.n, s.q0)?, &build_povm(s.n)?)
}

/// Like [`simulate_probs`] with an arbitrary initial state and POVM.
pub fn simulate_probs_with(s: &SensingScenario, initial: &PureState, povm: &Povm) -> Result<OutcomeDistribution> {
    if initial.qubits() != 2 * s.n || povm.n() != s.n {
        return Err(Error::DimensionMismatch {
            expected: 2 * s.n,
            found: initial.qubits(),
        });
    }
    let evolved = evolve_phases(initial, &s.omegas(), s.t)?;
    Ok(povm.probabilities(&evolved))
}

/// Multinomial counts for `shots` repetitions.
pub fn sample_run<R: Rng + ?Sized>(dist: &OutcomeDistribution, shots: u64, rng: &mut R) -> Result<[u64; 4]> {
    if shots == 0 {
        return Err(invalid("shots", "need at least one shot"));
    }
    let mut counts = [0u64; 4];
    let mut left = shots;
    let mut mass = 1.0;
    for j in 0..3 {
        let p = dist.p[j].max(0.0);
        let cond = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = if left == 0 {
            0
        } else {
            Binomial::new(left, cond)
                .map_err(|e| invalid("probabilities", e.to_string()))?
                .sample(rng)
        };
        counts[j] = k;
        left -= k;
        mass -= p;
    }
    counts[3] = left;
    Ok(counts)
}

/// Plug-in inversion of the outcome probabilities.
///
/// Returns `(theta+, |theta-|)`: `p3` depends on `cos(theta-/2)` only, so the
/// sign of `theta-` is fixed by convention (`w_t1 < w_t2` makes it negative).
/// Fails with [`Error::GhzCollapse`] when `q1 = 0` or `p3 <= 0`, i.e. when no
/// Dicke weight survives to carry `theta-`.
pub fn estimate_angles(p1: f64, p2: f64, p3: f64, n: usize, q0: f64) -> Result<(f64, f64)> {
    if !(q0 > 0.0 && q0 <= 1.0) {
        return Err(invalid("q0", format!("{q0} not in (0,1]")));
    }
    if n < 3 {
        return Err(invalid("n", "need n >= 3"));
    }
    let q1 = 1.0 - q0;
    if q1 <= 0.0 || p3 <= 0.0 {
        return Err(Error::GhzCollapse);
    }
    let nf = n as f64;
    let theta_plus = ((p1 - p2) / q0).clamp(-1.0, 1.0).acos();
    let f = (2.0 * nf - 1.0) / nf * (p3 / q1).sqrt() - (nf - 1.0) / nf * (theta_plus / 2.0).cos();
    let theta_minus = 2.0 * f.clamp(-1.0, 1.0).acos();
    Ok((theta_plus, theta_minus))
}

/// Per-repetition variance lower bounds `(G+, G-)` for the two angles.
pub fn sensitivity_bounds(n: usize, q0: f64, theta_plus: f64, theta_minus: f64) -> Result<SensitivityBound> {
    check_target(n, q0)?;
    if !(-PI / 2.0..0.0).contains(&theta_minus) {
        return Err(invalid("theta_minus", format!("{theta_minus} not in [-pi/2, 0)")));
    }
    let q1 = 1.0 - q0;
    let k = 1.0 - 1.0 / n as f64;
    let s2m = (theta_minus / 2.0).sin().powi(2);
    let s2p = (theta_plus / 2.0).sin().powi(2);
    let cc = (theta_plus / 2.0).cos() * (theta_minus / 2.0).cos();
    let g_minus = 1.0 / q1 + k * k * s2p / (q0 * q1 * s2m) + 2.0 * k * (1.0 - cc) / (q1 * s2m);
    Ok(SensitivityBound {
        g_plus: 1.0 / q0,
        g_minus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Number of ordered position pairs examined.
    pub pairs: usize,
    /// Largest L-infinity distance between any two outcome distributions.
    pub max_distance: f64,
    pub passed: bool,
}

/// Checks that the outcome distribution does not depend on which sensors
/// carry the fields.
pub fn anonymity_audit(n: usize, q0: f64, omega_a: f64, omega_b: f64, t: f64) -> Result<AuditReport> {
    anonymity_audit_with(n, q0, omega_a, omega_b, t, &build_povm(n)?)
}

pub fn anonymity_audit_with(n: usize, q0: f64, omega_a: f64, omega_b: f64, t: f64, povm: &Povm) -> Result<AuditReport> {
    let base = SensingScenario::new(n, q0, 1, 2, omega_a, omega_b, t)?;
    let initial = make_target(n, q0)?;
    let m = 2 * n;
    let mut dists = Vec::with_capacity(m * (m - 1));
    for t1 in 1..=m {
        for t2 in (1..=m).filter(|&t2| t2 != t1) {
            dists.push(simulate_probs_with(&base.with_positions(t1, t2)?, &initial, povm)?);
        }
    }
    let mut max_distance = 0.0f64;
    for (i, a) in dists.iter().enumerate() {
        for b in &dists[i + 1..] {
            max_distance = max_distance.max(a.max_distance(b));
        }
    }
    Ok(AuditReport {
        pairs: dists.len(),
        max_distance,
        passed: max_distance < AUDIT_TOLERANCE,
    })
}

/// A POVM whose third outcome projects onto `(|1^n 0^n> + |0^n 1^n>)/sqrt 2`.
/// The relative phase of the two branches depends on whether the two field
/// sensors sit in the same half, so the audit must reject it.
pub fn asymmetric_povm(n: usize) -> Result<Povm> {
    let m = 2 * n;
    let mut amps = vec![C64::new(0.0, 0.0); 1 << m];
    let low = (1usize << n) - 1;
    amps[low] = C64::new(1.0, 0.0);
    amps[low << n] = C64::new(1.0, 0.0);
    build_povm(n)?.with_projector(2, PureState::normalized(m, amps)?)
}
