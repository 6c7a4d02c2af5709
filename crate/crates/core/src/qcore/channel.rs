//! Noise channels in Kraus form.
//!
//! A channel is a sequence of layers applied one after another; each layer is
//! a complete Kraus set by itself. Product noise (dephasing, depolarizing)
//! has one layer per qubit, which keeps the operator count linear in `m`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::density::DensityOperator;
use super::measure::sample_index;
use super::state::{make_target, make_target_complement, PureState};
use super::C64;
use crate::error::{invalid, Error, Result};

pub const COMPLETENESS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum KrausOp {
    /// `c * I`.
    Identity(f64),
    /// A 2x2 operator on one qubit.
    Local { qubit: usize, matrix: [[C64; 2]; 2] },
    /// `c * U` where `U` rotates `from -> to` and `to -> -from` and is the
    /// identity on the orthogonal complement of their span.
    PlaneRotation { coeff: f64, from: PureState, to: PureState },
}

impl KrausOp {
    fn apply_pure(&self, psi: &PureState) -> Vec<C64> {
        match self {
            KrausOp::Identity(c) => psi.amplitudes().iter().map(|a| a * c).collect(),
            KrausOp::Local { qubit, matrix } => {
                let mut out = psi.clone();
                out.apply_single(*qubit, *matrix);
                out.amplitudes().to_vec()
            }
            KrausOp::PlaneRotation { coeff, from, to } => {
                let a = from.inner(psi);
                let b = to.inner(psi);
                // U psi = psi + (to - from) a - (to + from) b
                psi.amplitudes()
                    .iter()
                    .zip(from.amplitudes().iter().zip(to.amplitudes()))
                    .map(|(p, (f, t))| (p + (t - f) * a - (t + f) * b) * coeff)
                    .collect()
            }
        }
    }

    fn conjugate_density(&self, rho: &DensityOperator) -> DMatrix<C64> {
        match self {
            KrausOp::Identity(c) => rho.matrix() * C64::new(c * c, 0.0),
            KrausOp::Local { qubit, matrix } => rho.conjugate_local(*qubit, matrix),
            KrausOp::PlaneRotation { coeff, from, to } => {
                let f = DVector::from_column_slice(from.amplitudes());
                let t = DVector::from_column_slice(to.amplitudes());
                let left = |m: &DMatrix<C64>| -> DMatrix<C64> {
                    let a = f.adjoint() * m;
                    let b = t.adjoint() * m;
                    m + (&t - &f) * a - (&t + &f) * b
                };
                let half = left(rho.matrix());
                let full = left(&half.adjoint()).adjoint();
                full * C64::new(coeff * coeff, 0.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "snake_case")]
pub enum ChannelKind {
    None,
    Dephase(f64),
    Depolarize(f64),
    CoherentMix(f64),
}

impl ChannelKind {
    pub fn strength(&self) -> f64 {
        match *self {
            ChannelKind::None => 0.0,
            ChannelKind::Dephase(x) | ChannelKind::Depolarize(x) | ChannelKind::CoherentMix(x) => x,
        }
    }

    /// Builds the channel for a `2n`-qubit register; `q0` fixes the target
    /// plane for `CoherentMix`.
    pub fn build(&self, n: usize, q0: f64) -> Result<KrausChannel> {
        standard_channel(*self, n, q0)
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelKind::None => write!(f, "none"),
            ChannelKind::Dephase(x) => write!(f, "dephase:{x}"),
            ChannelKind::Depolarize(x) => write!(f, "depolarize:{x}"),
            ChannelKind::CoherentMix(x) => write!(f, "coherent_mix:{x}"),
        }
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    /// Accepts `none`, `dephase:g`, `depolarize:p`, `coherent_mix:eps`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(ChannelKind::None);
        }
        let (kind, param) = s
            .split_once(':')
            .ok_or_else(|| invalid("noise", format!("expected kind:param, got `{s}`")))?;
        let x: f64 = param
            .trim()
            .parse()
            .map_err(|_| invalid("noise", format!("bad parameter `{param}`")))?;
        let kind = match kind.trim().to_ascii_lowercase().as_str() {
            "dephase" => ChannelKind::Dephase(x),
            "depolarize" => ChannelKind::Depolarize(x),
            "coherent_mix" | "coherent-mix" => ChannelKind::CoherentMix(x),
            other => return Err(invalid("noise", format!("unknown channel `{other}`"))),
        };
        check_strength(kind.strength())?;
        Ok(kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    label: String,
    strength: f64,
    qubits: usize,
    layers: Vec<Vec<KrausOp>>,
}

impl KrausChannel {
    pub fn identity(qubits: usize) -> Self {
        Self {
            label: "none".into(),
            strength: 0.0,
            qubits,
            layers: Vec::new(),
        }
    }

    /// Validates completeness of every layer.
    pub fn new(label: impl Into<String>, strength: f64, qubits: usize, layers: Vec<Vec<KrausOp>>) -> Result<Self> {
        let ch = Self {
            label: label.into(),
            strength,
            qubits,
            layers,
        };
        let defect = ch.completeness_defect();
        if defect > COMPLETENESS_TOLERANCE {
            return Err(invalid("kraus", format!("completeness defect {defect:e}")));
        }
        Ok(ch)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn layers(&self) -> &[Vec<KrausOp>] {
        &self.layers
    }

    pub fn is_identity(&self) -> bool {
        self.layers.is_empty()
    }

    /// `max |sum K^dagger K - I|` over layers.
    ///
    /// Local layers are checked as 2x2 matrices. Plane rotations are unitary
    /// when `from`, `to` are orthonormal, so their layer reduces to the
    /// coefficient sum plus that orthonormality defect.
    pub fn completeness_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for layer in &self.layers {
            let mut local = [[C64::new(0.0, 0.0); 2]; 2];
            let mut scalar = 0.0;
            let mut ortho = 0.0f64;
            let mut has_local = false;
            for op in layer {
                match op {
                    KrausOp::Identity(c) => scalar += c * c,
                    KrausOp::Local { matrix, .. } => {
                        has_local = true;
                        for i in 0..2 {
                            for j in 0..2 {
                                local[i][j] += matrix[0][i].conj() * matrix[0][j] + matrix[1][i].conj() * matrix[1][j];
                            }
                        }
                    }
                    KrausOp::PlaneRotation { coeff, from, to } => {
                        scalar += coeff * coeff;
                        ortho = ortho
                            .max(from.inner(to).norm())
                            .max((from.norm() - 1.0).abs())
                            .max((to.norm() - 1.0).abs());
                    }
                }
            }
            if has_local {
                for (i, row) in local.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        let want = if i == j { 1.0 - scalar } else { 0.0 };
                        worst = worst.max((v - want).norm());
                    }
                }
            } else {
                worst = worst.max((scalar - 1.0).abs());
            }
            worst = worst.max(ortho);
        }
        worst
    }

    pub fn apply_density(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.qubits() != self.qubits {
            return Err(Error::DimensionMismatch {
                expected: self.qubits,
                found: rho.qubits(),
            });
        }
        let mut cur = rho.clone();
        for layer in &self.layers {
            let d = cur.matrix().nrows();
            let mut acc = DMatrix::zeros(d, d);
            for op in layer {
                acc += op.conjugate_density(&cur);
            }
            *cur.matrix_mut() = acc;
        }
        Ok(DensityOperator::from_raw(cur.qubits(), cur.matrix().clone()))
    }

    /// Samples one Kraus branch per layer (quantum trajectory).
    pub fn sample_pure<R: Rng + ?Sized>(&self, psi: &PureState, rng: &mut R) -> Result<PureState> {
        if psi.qubits() != self.qubits {
            return Err(Error::DimensionMismatch {
                expected: self.qubits,
                found: psi.qubits(),
            });
        }
        let mut cur = psi.clone();
        for layer in &self.layers {
            let branches: Vec<Vec<C64>> = layer.iter().map(|op| op.apply_pure(&cur)).collect();
            let weights: Vec<f64> = branches.iter().map(|b| b.iter().map(|a| a.norm_sqr()).sum()).collect();
            let i = sample_index(&weights, rng);
            cur = PureState::normalized(self.qubits, branches[i].clone())?;
        }
        Ok(cur)
    }
}

fn check_strength(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid("noise", format!("parameter {x} outside [0, 1]")));
    }
    Ok(())
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Standard noise on `2n` qubits.
///
/// * `Dephase(g)`: each qubit `rho -> (1 - g/2) rho + (g/2) Z rho Z`.
/// * `Depolarize(p)`: each qubit `rho -> (1 - p) rho + p I/2`.
/// * `CoherentMix(e)`: `rho -> (1 - e) rho + e U rho U^dagger`, where `U`
///   rotates the target into `sqrt(q1)|GHZ> - sqrt(q0)|D>`; the target
///   fidelity after the channel is exactly `1 - e`.
pub fn standard_channel(kind: ChannelKind, n: usize, q0: f64) -> Result<KrausChannel> {
    let m = 2 * n;
    check_strength(kind.strength())?;
    let zero = c(0.0);
    match kind {
        ChannelKind::None => Ok(KrausChannel::identity(m)),
        ChannelKind::Dephase(g) if g == 0.0 => Ok(KrausChannel::identity(m)),
        ChannelKind::Depolarize(p) if p == 0.0 => Ok(KrausChannel::identity(m)),
        ChannelKind::Dephase(g) => {
            let layers = (0..m)
                .map(|q| {
                    vec![
                        KrausOp::Identity((1.0 - g / 2.0).sqrt()),
                        KrausOp::Local {
                            qubit: q,
                            matrix: [[c((g / 2.0).sqrt()), zero], [zero, c(-(g / 2.0).sqrt())]],
                        },
                    ]
                })
                .collect();
            KrausChannel::new(kind.to_string(), g, m, layers)
        }
        ChannelKind::Depolarize(p) => {
            let s = (p / 4.0).sqrt();
            let i = C64::new(0.0, s);
            let layers = (0..m)
                .map(|q| {
                    vec![
                        KrausOp::Identity((1.0 - 3.0 * p / 4.0).sqrt()),
                        KrausOp::Local { qubit: q, matrix: [[zero, c(s)], [c(s), zero]] },
                        KrausOp::Local { qubit: q, matrix: [[zero, -i], [i, zero]] },
                        KrausOp::Local { qubit: q, matrix: [[c(s), zero], [zero, c(-s)]] },
                    ]
                })
                .collect();
            KrausChannel::new(kind.to_string(), p, m, layers)
        }
        ChannelKind::CoherentMix(e) => {
            let from = make_target(n, q0)?;
            let to = make_target_complement(n, q0)?;
            let layer = vec![
                KrausOp::Identity((1.0 - e).sqrt()),
                KrausOp::PlaneRotation { coeff: e.sqrt(), from, to },
            ];
            KrausChannel::new(kind.to_string(), e, m, vec![layer])
        }
    }
}
