//! Verification strategies as weight-sector operators.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qcore::sector::SectorOperator;
use crate::qcore::state::check_target;
use crate::sparse::CsrMatrix;
use crate::symcomb::{binom_f64, central_binom, johnson_adjacency, qubit_mask, SubsetFamily, WeightBasis};

/// Smallest `q0` for which the GHZ-like half keeps `lambda0 >= lambda1`.
pub fn q_min(n: usize) -> f64 {
    2.0 / (central_binom(n) + 2.0)
}

/// Amplitudes `(lambda0, lambda1)` of the GHZ-like state left on the
/// complement after `n` qubits of the target are measured as `0^n`.
pub fn lambda_map(n: usize, q0: f64) -> Result<(f64, f64)> {
    check_target(n, q0)?;
    let qm = q_min(n);
    if q0 < qm * (1.0 - 1e-12) {
        return Err(invalid("q0", format!("{q0} below q_min = {qm}")));
    }
    let c = central_binom(n);
    let den = c * q0 + 2.0 * (1.0 - q0);
    // lambda1 directly: 1 - lambda0 cancels badly once lambda0 is near one
    Ok(((c * q0 / den).max(0.5), (2.0 * (1.0 - q0) / den).min(0.5)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzLikeParams {
    /// Probability of running the Z test.
    pub p: f64,
    pub lambda0: f64,
    pub lambda1: f64,
}

impl GhzLikeParams {
    pub fn new(p: f64, lambda0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("p", format!("{p} not in [0,1]")));
        }
        if !(0.5..=1.0).contains(&lambda0) {
            return Err(invalid(
                "lambda0",
                format!("{lambda0} not in [1/2, 1]; conjugate by X on every qubit instead"),
            ));
        }
        Ok(Self {
            p,
            lambda0,
            lambda1: 1.0 - lambda0,
        })
    }

    pub fn for_target(n: usize, q0: f64, p: f64) -> Result<Self> {
        Self::new(p, lambda_map(n, q0)?.0)
    }
}

/// Strategy of the GHZ-like protocol on `m` qubits:
/// `[p + (1-p) l0] Z^0 + [p + (1-p) l1] Z^m + (1-p) sqrt(l0 l1)(|0^m><1^m| + h.c.)
///  + (1-p) sum_{a=1}^{m-1} [l0 + a (1 - 2 l0)/m] Z^a`.
pub fn strategy_ghz_like(m: usize, params: &GhzLikeParams) -> Result<SectorOperator> {
    if m < 2 {
        return Err(invalid("m", "need at least 2 qubits"));
    }
    let GhzLikeParams { p, lambda0: l0, lambda1: l1 } = *params;
    let mut op = SectorOperator::zero(m)?;
    op.add_projector(0, p + (1.0 - p) * l0);
    op.add_projector(m as i64, p + (1.0 - p) * l1);
    let off = (1.0 - p) * (l0 * l1).sqrt();
    if off != 0.0 {
        op.add_triplets(0, m, [(0, 0, off)]);
        op.add_triplets(m, 0, [(0, 0, off)]);
    }
    for a in 1..m {
        op.add_projector(a as i64, (1.0 - p) * (l0 + a as f64 * (1.0 - 2.0 * l0) / m as f64));
    }
    Ok(op)
}

/// Rows of weight `low`, columns of weight `low + 2`; entry 1 where the
/// column string adds two ones to the row string.
pub fn raise_by_two(m: usize, low: usize) -> Result<CsrMatrix> {
    let lo = WeightBasis::new(m, low)?;
    let hi = WeightBasis::new(m, low + 2)?;
    let mut t = Vec::new();
    for (r, u) in lo.iter().enumerate() {
        let zeros: Vec<usize> = (0..m).filter(|&q| u & qubit_mask(q, m) == 0).collect();
        for (i, &a) in zeros.iter().enumerate() {
            for &b in &zeros[i + 1..] {
                let v = u | qubit_mask(a, m) | qubit_mask(b, m);
                t.push((r, hi.rank_unchecked(v) as usize, 1.0));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(lo.size() as usize, hi.size() as usize, t))
}

fn add_cross(op: &mut SectorOperator, m: usize, low: usize, coeff: f64) -> Result<()> {
    let up = raise_by_two(m, low)?;
    op.add_block(low, low + 2, &up, coeff);
    op.add_block(low + 2, low, &up.transpose(), coeff);
    Ok(())
}

/// Strategy of the Dicke protocol for `|D_m^k>`.
pub fn strategy_dicke(m: usize, k: usize) -> Result<SectorOperator> {
    if m < 3 {
        return Err(invalid("m", "need at least 3 qubits"));
    }
    if k == 0 || k >= m {
        return Err(invalid("k", format!("{k} not in 1..={}", m - 1)));
    }
    let norm = (m * (m - 1)) as f64;
    let mut op = SectorOperator::zero(m)?;
    op.add_projector(k as i64, (m * (m - 1) - k * (m - k)) as f64 / norm);
    op.add_block(k, k, &johnson_adjacency(m, k)?, 1.0 / norm);
    op.add_projector(k as i64 - 1, binom_f64((m - k + 1) as u64, 2) / norm);
    op.add_projector(k as i64 + 1, binom_f64((k + 1) as u64, 2) / norm);
    add_cross(&mut op, m, k - 1, 1.0 / norm)?;
    Ok(op)
}

/// The per-subset strategy blocks acting on the unmeasured half.
fn half_strategies(n: usize, q0: f64, p: f64) -> Result<Vec<SectorOperator>> {
    let params = GhzLikeParams::for_target(n, q0, p)?;
    let ghz = strategy_ghz_like(n, &params)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(ghz.clone());
    for l in 1..n {
        out.push(strategy_dicke(n, n - l)?);
    }
    out.push(ghz.conjugate_x());
    Ok(out)
}

pub const BRUTE_FORCE_MAX_N: usize = 5;

/// Strategy of the combined protocol by explicit averaging over every
/// subset `R` of `n` measured qubits.
pub fn assemble_strategy_bruteforce(n: usize, q0: f64, p: f64) -> Result<SectorOperator> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge {
            size: n,
            limit: BRUTE_FORCE_MAX_N,
        });
    }
    let halves: Vec<_> = half_strategies(n, q0, p)?.iter().map(SectorOperator::to_dense).collect();
    let m = 2 * n;
    let dim = 1usize << m;
    let family = SubsetFamily::new(m, n)?;
    let weight = 1.0 / family.count() as f64;
    let mut acc = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for r in family.iter() {
        let rbar: Vec<usize> = (0..m).filter(|q| !r.contains(q)).collect();
        // spread an n-bit pattern (qubit i of the pattern) onto the given qubits
        let spread = |qs: &[usize]| -> Vec<usize> {
            (0..1usize << n)
                .map(|a| {
                    qs.iter()
                        .enumerate()
                        .filter(|(i, _)| a & qubit_mask(*i, n) as usize != 0)
                        .fold(0usize, |acc, (_, &q)| acc | qubit_mask(q, m) as usize)
                })
                .collect()
        };
        let (sr, sb) = (spread(&r), spread(&rbar));
        for a in 0..1usize << n {
            let block = &halves[a.count_ones() as usize];
            for x in 0..1usize << n {
                for y in 0..1usize << n {
                    let v = block[(x, y)];
                    if v != 0.0 {
                        acc[(sr[a] | sb[x], sr[a] | sb[y])] += v * weight;
                    }
                }
            }
        }
    }
    SectorOperator::from_dense(m, &acc)
}

/// The coefficients `(a, b, c, d)` of the first component.
pub fn abcd(n: usize, q0: f64, p: f64) -> Result<(f64, f64, f64, f64)> {
    let (l0, l1) = lambda_map(n, q0)?;
    let nf = n as f64;
    let c_big = central_binom(n);
    let a = p + (1.0 - p) * l0;
    let b = (3.0 * nf - 2.0) / (2.0 * (2.0 * nf - 1.0)) - 2.0 * (1.0 - p) * l0 / c_big;
    let c = 1.0 / (2.0 * nf * (2.0 * nf - 1.0));
    let d = (1.0 - p) * (l0 * l1).sqrt() / c_big;
    Ok((a, b, c, d))
}

/// Diagonal coefficient of `Z^{n-1} + Z^{n+1}` in the second component.
pub fn omega2_diagonal(n: usize, q0: f64, p: f64) -> Result<f64> {
    let (l0, _) = lambda_map(n, q0)?;
    let nf = n as f64;
    let c_big = central_binom(n);
    Ok((nf + 1.0)
        * (1.0 / (4.0 * (2.0 * nf - 1.0)) + (1.0 - p) / c_big * (1.0 - 1.0 / nf - (1.0 - 2.0 / nf) * l0)))
}

/// Diagonal coefficient of `Z^l + Z^{2n-l}` in the third component,
/// `1 <= l <= n-2`.
pub fn omega3_coefficient(n: usize, q0: f64, p: f64, l: usize) -> Result<f64> {
    if l == 0 || l + 2 > n {
        return Err(invalid("l", format!("{l} not in 1..={}", n.saturating_sub(2))));
    }
    let (l0, _) = lambda_map(n, q0)?;
    let (nf, lf) = (n as f64, l as f64);
    let c_big = central_binom(n);
    Ok((1.0 - p) / c_big * binom_f64((2 * n - l) as u64, n as u64) * (lf / nf + (1.0 - 2.0 * lf / nf) * l0))
}

/// The three mutually orthogonal parts whose sum is the combined strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// Sectors `0, n, 2n`.
    pub omega1: SectorOperator,
    /// Sectors `n-1, n+1`.
    pub omega2: SectorOperator,
    /// Sectors `l, 2n-l` for `1 <= l <= n-2` (diagonal).
    pub omega3: SectorOperator,
}

impl Decomposition {
    pub fn total(&self) -> SectorOperator {
        self.omega1.plus(&self.omega2).plus(&self.omega3)
    }

    pub fn parts(&self) -> [&SectorOperator; 3] {
        [&self.omega1, &self.omega2, &self.omega3]
    }
}

pub fn assemble_strategy_decomposed(n: usize, q0: f64, p: f64) -> Result<Decomposition> {
    let m = 2 * n;
    let (a, b, c, d) = abcd(n, q0, p)?;

    let mut omega1 = SectorOperator::zero(m)?;
    omega1.add_projector(0, a);
    omega1.add_projector(m as i64, a);
    omega1.add_projector(n as i64, b);
    omega1.add_block(n, n, &johnson_adjacency(m, n)?, c);
    let size_n = omega1.sector_dim(n);
    for end in [0, m] {
        omega1.add_triplets(end, n, (0..size_n).map(|j| (0, j, d)));
        omega1.add_triplets(n, end, (0..size_n).map(|i| (i, 0, d)));
    }

    let mut omega2 = SectorOperator::zero(m)?;
    let e2 = omega2_diagonal(n, q0, p)?;
    omega2.add_projector(n as i64 - 1, e2);
    omega2.add_projector(n as i64 + 1, e2);
    add_cross(&mut omega2, m, n - 1, c)?;

    let mut omega3 = SectorOperator::zero(m)?;
    for l in 1..n.saturating_sub(1) {
        let v = omega3_coefficient(n, q0, p, l)?;
        omega3.add_projector(l as i64, v);
        omega3.add_projector((m - l) as i64, v);
    }
    Ok(Decomposition { omega1, omega2, omega3 })
}
