//! Number of copies needed for a given confidence, and related bounds.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::qcore::state::{check_target, make_target};
use crate::symcomb::central_binom;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleComplexity {
    /// `ceil((2n-1) ln(1/delta) / eps)`.
    pub dicke_term: u64,
    /// `ceil((q0 4^n / (2 q1 sqrt(pi n)) + 1) ln(1/delta) / (eps (1-p)))`.
    pub ghz_term: u64,
    pub copies: u64,
}

/// Copies sufficient to reject, with probability at least `1 - delta`, a
/// source whose copies all have fidelity at most `1 - eps`.
///
/// Each term bounds `ln(1/delta) / (nu eps)` for one branch of the spectral
/// gap; Wallis' inequality replaces `C(2n,n)` by `4^n / sqrt(pi n)`.
pub fn sample_complexity(n: usize, q0: f64, eps: f64, delta: f64, p: f64) -> Result<SampleComplexity> {
    check_target(n, q0)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid("epsilon", format!("{eps} not in (0,1]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("{delta} not in (0,1)")));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(invalid("p", format!("{p} not in [0,1)")));
    }
    let nf = n as f64;
    let log = (1.0 / delta).ln();
    let q1 = 1.0 - q0;
    let dicke = ((2.0 * nf - 1.0) * log / eps).ceil();
    let wallis = 4f64.powi(n as i32) / (std::f64::consts::PI * nf).sqrt();
    let ghz = ((q0 * wallis / (2.0 * q1) + 1.0) * log / (eps * (1.0 - p))).ceil();
    let (dicke_term, ghz_term) = (dicke as u64, ghz as u64);
    Ok(SampleComplexity {
        dicke_term,
        ghz_term,
        copies: dicke_term.max(ghz_term),
    })
}

/// `ceil(ln delta / ln(1 - nu eps))`, the exact requirement for a given gap.
pub fn exact_copies(nu: f64, eps: f64, delta: f64) -> Result<u64> {
    let x = nu * eps;
    if !(x > 0.0 && x <= 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("nu*eps", "need 0 < nu eps <= 1 and 0 < delta < 1"));
    }
    if x == 1.0 {
        return Ok(1);
    }
    // ln_1p keeps tiny gaps from rounding away
    Ok((delta.ln() / (-x).ln_1p()).ceil().max(0.0) as u64)
}

/// `(1 - nu eps)^M`, the largest acceptance probability of a batch of `M`
/// copies each at fidelity at most `1 - eps`.
pub fn failure_bound(nu: f64, eps: f64, copies: u64) -> Result<f64> {
    let x = nu * eps;
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid("nu*eps", format!("{x} not in [0,1]")));
    }
    Ok(((-x).ln_1p() * copies as f64).exp())
}

/// `2 sqrt(2 q0 q1 / C(2n,n))`, a lower bound on `<X^n (x) I^n>` in the target.
pub fn pauli_witness_bound(n: usize, q0: f64) -> Result<f64> {
    check_target(n, q0)?;
    Ok(2.0 * (2.0 * q0 * (1.0 - q0) / central_binom(n)).sqrt())
}

/// `<psi_t| X^n (x) I^n |psi_t>` from the state vector.
pub fn pauli_witness_expectation(n: usize, q0: f64) -> Result<f64> {
    let t = make_target(n, q0)?;
    let mut flipped = t.clone();
    flipped.apply_x(&(0..n).collect::<Vec<_>>());
    Ok(t.inner(&flipped).re)
}
