//! The executable verification protocol, copy by copy.
//!
//! For each copy a random half `R` of the qubits is measured in Z. The
//! total weight `w` of those outcomes decides what the other half is
//! checked against: `w = 0` runs the GHZ-like test, `w = n` the same test
//! with every basis flipped by X, and anything in between the Dicke test
//! for `n - w` excitations.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::complexity::sample_complexity;
use super::strategy::{lambda_map, q_min, GhzLikeParams};
use crate::error::{invalid, Error, Result};
use crate::qcore::channel::KrausChannel;
use crate::qcore::density::DensityOperator;
use crate::qcore::measure::{measure_qubit, measure_x, measure_z};
use crate::qcore::state::{make_target, PureState};
use crate::qcore::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// All of `R` read 0: GHZ-like test with `(lambda0, lambda1)`.
    GhzLike,
    /// Mixed weight on `R`: Dicke test.
    Dicke,
    /// All of `R` read 1: GHZ-like test with X applied to every basis.
    GhzLikeFlipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairBasis {
    Z,
    X,
}

/// What the second stage did. Qubit indices are global and 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum StageRecord {
    /// `a = 0`: every remaining qubit measured in Z.
    ZTest { qubits: Vec<usize>, outcomes: Vec<u8> },
    /// `a = 1`: phase test with the final measurement on `target`.
    /// `r` and `o` list every remaining qubit, including the derived
    /// `r_k`, `o_k` of the target.
    PhaseTest {
        qubits: Vec<usize>,
        target: usize,
        r: Vec<u8>,
        o: Vec<u8>,
        final_outcome: u8,
    },
    /// Dicke test for `excitations`; `pair` holds the outcomes of
    /// `(k1, k2)` when they were measured.
    DickeTest {
        excitations: usize,
        k1: usize,
        k2: usize,
        others: Vec<usize>,
        other_outcomes: Vec<u8>,
        basis: Option<PairBasis>,
        pair: Option<[u8; 2]>,
    },
}

/// One line of a session transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyVerdict {
    pub copy: u64,
    /// The measured half `R`, sorted.
    pub subset: Vec<usize>,
    /// Z outcomes on `subset`, in the same order.
    pub outcomes: Vec<u8>,
    pub branch: Branch,
    pub detail: StageRecord,
    pub verdict: Verdict,
}

impl CopyVerdict {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }
}

/// Precomputed verifier for one `(n, q0, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verifier {
    n: usize,
    params: GhzLikeParams,
}

impl Verifier {
    pub fn new(n: usize, q0: f64, p: f64) -> Result<Self> {
        Ok(Self {
            n,
            params: GhzLikeParams::for_target(n, q0, p)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> &GhzLikeParams {
        &self.params
    }

    /// Runs the protocol on one copy (consumed by measurement).
    pub fn verify<R: Rng + ?Sized>(&self, copy: &PureState, index: u64, rng: &mut R) -> Result<CopyVerdict> {
        let n = self.n;
        if copy.qubits() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                found: copy.qubits(),
            });
        }
        let mut state = copy.clone();
        let mut order: Vec<usize> = (0..2 * n).collect();
        order.partial_shuffle(rng, n);
        let mut subset = order[..n].to_vec();
        subset.sort_unstable();
        let mut rest = order[n..].to_vec();
        rest.sort_unstable();

        let outcomes: Vec<u8> = subset.iter().map(|&q| measure_z(&mut state, q, rng)).collect();
        let w = outcomes.iter().map(|&o| o as usize).sum::<usize>();
        let (branch, detail, accepted) = if w == 0 || w == n {
            let flip = w == n;
            let (detail, ok) = self.ghz_like_test(&mut state, &rest, flip, rng);
            (if flip { Branch::GhzLikeFlipped } else { Branch::GhzLike }, detail, ok)
        } else {
            let (detail, ok) = dicke_test(&mut state, &rest, n - w, rng);
            (Branch::Dicke, detail, ok)
        };
        Ok(CopyVerdict {
            copy: index,
            subset,
            outcomes,
            branch,
            detail,
            verdict: if accepted { Verdict::Accept } else { Verdict::Reject },
        })
    }

    /// Mixed input: draws a pure state from `rho`'s spectral decomposition.
    /// The acceptance probability is linear in the state, so this is exact
    /// in distribution.
    pub fn verify_mixed<R: Rng + ?Sized>(&self, rho: &DensityOperator, index: u64, rng: &mut R) -> Result<CopyVerdict> {
        let psi = rho.sample_pure(rng)?;
        self.verify(&psi, index, rng)
    }

    fn ghz_like_test<R: Rng + ?Sized>(
        &self,
        state: &mut PureState,
        qubits: &[usize],
        flip: bool,
        rng: &mut R,
    ) -> (StageRecord, bool) {
        let one = C64::new(1.0, 0.0);
        if rng.random::<f64>() < self.params.p {
            let outcomes: Vec<u8> = qubits.iter().map(|&q| measure_z(state, q, rng)).collect();
            let ok = outcomes.iter().all(|&o| o == outcomes[0]);
            return (
                StageRecord::ZTest {
                    qubits: qubits.to_vec(),
                    outcomes,
                },
                ok,
            );
        }
        let m = qubits.len();
        let k = rng.random_range(0..m);
        let i_pow = |r: u8| if r == 0 { one } else { C64::new(0.0, 1.0) };
        let orient = |v: [C64; 2]| if flip { [v[1], v[0]] } else { v };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut r = vec![0u8; m];
        let mut o = vec![0u8; m];
        for i in (0..m).filter(|&i| i != k) {
            r[i] = rng.random_range(0..2u8);
            // outcome 0 is S^r|+>
            o[i] = measure_qubit(state, qubits[i], orient([C64::new(h, 0.0), i_pow(r[i]) * h]), rng).0;
        }
        r[k] = r.iter().fold(0, |acc, &x| acc ^ x);
        o[k] = o.iter().fold(0, |acc, &x| acc ^ x);
        let r_sum: u32 = r.iter().map(|&x| x as u32).sum();
        assert!(r_sum % 2 == 0, "parity of r must be even");
        let e = (o[k] as u32 + r_sum / 2) % 2;
        let sign = if e == 0 { 1.0 } else { -1.0 };
        let phi = [
            one * self.params.lambda0.sqrt(),
            i_pow(r[k]) * sign * self.params.lambda1.sqrt(),
        ];
        let norm = (phi[0].norm_sqr() + phi[1].norm_sqr()).sqrt();
        let phi = orient([phi[0] / norm, phi[1] / norm]);
        let final_outcome = measure_qubit(state, qubits[k], phi, rng).0;
        (
            StageRecord::PhaseTest {
                qubits: qubits.to_vec(),
                target: qubits[k],
                r,
                o,
                final_outcome,
            },
            final_outcome == 0,
        )
    }
}

fn dicke_test<R: Rng + ?Sized>(state: &mut PureState, qubits: &[usize], k: usize, rng: &mut R) -> (StageRecord, bool) {
    let m = qubits.len();
    let mut pick = rand::seq::index::sample(rng, m, 2).into_vec();
    pick.sort_unstable();
    let (k1, k2) = (qubits[pick[0]], qubits[pick[1]]);
    let others: Vec<usize> = qubits.iter().copied().filter(|&q| q != k1 && q != k2).collect();
    let other_outcomes: Vec<u8> = others.iter().map(|&q| measure_z(state, q, rng)).collect();
    let s = other_outcomes.iter().map(|&o| o as usize).sum::<usize>();
    let (basis, pair, ok) = if s == k || s + 2 == k {
        let pair = [measure_z(state, k1, rng), measure_z(state, k2, rng)];
        (Some(PairBasis::Z), Some(pair), s + pair[0] as usize + pair[1] as usize == k)
    } else if s + 1 == k {
        let pair = [measure_x(state, k1, rng), measure_x(state, k2, rng)];
        (Some(PairBasis::X), Some(pair), pair[0] == pair[1])
    } else {
        (None, None, false)
    };
    (
        StageRecord::DickeTest {
            excitations: k,
            k1,
            k2,
            others,
            other_outcomes,
            basis,
            pair,
        },
        ok,
    )
}

/// Runs the protocol on a single copy.
pub fn verify_copy<R: Rng + ?Sized>(copy: &PureState, n: usize, q0: f64, p: f64, rng: &mut R) -> Result<CopyVerdict> {
    Verifier::new(n, q0, p)?.verify(copy, 0, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationPlan {
    pub n: usize,
    pub q0: f64,
    pub p: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Number of copies to check.
    pub copies: u64,
}

impl VerificationPlan {
    /// Plan with the sufficient number of copies.
    pub fn new(n: usize, q0: f64, p: f64, epsilon: f64, delta: f64) -> Result<Self> {
        lambda_map(n, q0)?;
        let copies = sample_complexity(n, q0, epsilon, delta, p)?.copies;
        Ok(Self {
            n,
            q0,
            p,
            epsilon,
            delta,
            copies,
        })
    }

    /// Same plan with an explicit copy count (not checked against the bound).
    pub fn with_copies(mut self, copies: u64) -> Self {
        self.copies = copies;
        self
    }

    /// Checks the copy count against the bound and `q0` against `q_min`.
    pub fn validate(&self) -> Result<()> {
        if self.q0 < q_min(self.n) * (1.0 - 1e-12) || self.q0 >= 1.0 {
            return Err(invalid("q0", "outside [q_min, 1)"));
        }
        let need = sample_complexity(self.n, self.q0, self.epsilon, self.delta, self.p)?.copies;
        if self.copies < need {
            return Err(invalid("copies", format!("{} below the required {need}", self.copies)));
        }
        Ok(())
    }
}

/// Something that hands out copies of a (possibly noisy) state.
pub trait CopySource {
    fn next_copy(&mut self, rng: &mut dyn RngCore) -> Result<PureState>;
}

/// Copies of a fixed state passed through a channel, sampled as quantum
/// trajectories. An optional limit makes the source finite.
#[derive(Debug, Clone)]
pub struct NoisySource {
    state: PureState,
    channel: KrausChannel,
    limit: Option<u64>,
    produced: u64,
}

impl NoisySource {
    pub fn new(state: PureState, channel: KrausChannel) -> Result<Self> {
        if channel.qubits() != state.qubits() {
            return Err(Error::DimensionMismatch {
                expected: state.qubits(),
                found: channel.qubits(),
            });
        }
        Ok(Self {
            state,
            channel,
            limit: None,
            produced: 0,
        })
    }

    pub fn ideal(n: usize, q0: f64) -> Result<Self> {
        Self::new(make_target(n, q0)?, KrausChannel::identity(2 * n))
    }

    pub fn noisy_target(n: usize, q0: f64, channel: KrausChannel) -> Result<Self> {
        Self::new(make_target(n, q0)?, channel)
    }

    pub fn fixed(state: PureState) -> Self {
        let q = state.qubits();
        Self {
            state,
            channel: KrausChannel::identity(q),
            limit: None,
            produced: 0,
        }
    }

    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn produced(&self) -> u64 {
        self.produced
    }
}

impl CopySource for NoisySource {
    fn next_copy(&mut self, rng: &mut dyn RngCore) -> Result<PureState> {
        if self.limit.is_some_and(|l| self.produced >= l) {
            return Err(Error::SourceExhausted { produced: self.produced });
        }
        self.produced += 1;
        if self.channel.is_identity() {
            Ok(self.state.clone())
        } else {
            self.channel.sample_pure(&self.state, rng)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub plan: VerificationPlan,
    /// Verdicts in order. Checking stops at the first rejection, so a
    /// rejected session may hold fewer than `plan.copies` records.
    pub verdicts: Vec<CopyVerdict>,
    pub accepted: bool,
}

impl SessionTranscript {
    /// The session accepts iff all planned copies were checked and accepted.
    pub fn is_consistent(&self) -> bool {
        let all = self.verdicts.iter().all(CopyVerdict::accepted);
        self.accepted == (all && self.verdicts.len() as u64 == self.plan.copies)
    }

    /// One JSON object per line, one line per copy.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.verdicts {
            let line = serde_json::to_string(v).map_err(|e| Error::Transcript(e.to_string()))?;
            writeln!(w, "{line}").map_err(|e| Error::Transcript(e.to_string()))?;
        }
        Ok(())
    }

    pub fn read_jsonl<Rd: BufRead>(plan: VerificationPlan, r: Rd) -> Result<Self> {
        let mut verdicts = Vec::new();
        for line in r.lines() {
            let line = line.map_err(|e| Error::Transcript(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            verdicts.push(serde_json::from_str(&line).map_err(|e| Error::Transcript(e.to_string()))?);
        }
        let accepted =
            verdicts.iter().all(CopyVerdict::accepted) && verdicts.len() as u64 == plan.copies;
        Ok(Self {
            plan,
            verdicts,
            accepted,
        })
    }
}

/// Checks `plan.copies` copies from `source`, stopping at the first rejection.
pub fn verify_batch<S: CopySource + ?Sized, R: RngCore>(
    source: &mut S,
    plan: &VerificationPlan,
    rng: &mut R,
) -> Result<SessionTranscript> {
    let verifier = Verifier::new(plan.n, plan.q0, plan.p)?;
    let mut verdicts = Vec::new();
    let mut accepted = true;
    for i in 0..plan.copies {
        let copy = source.next_copy(rng)?;
        let v = verifier.verify(&copy, i, rng)?;
        let ok = v.accepted();
        verdicts.push(v);
        if !ok {
            accepted = false;
            break;
        }
    }
    Ok(SessionTranscript {
        plan: *plan,
        verdicts,
        accepted,
    })
}
