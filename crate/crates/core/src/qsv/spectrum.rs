//! Closed-form spectrum of the combined strategy and its numeric cross-check.

use serde::{Deserialize, Serialize};

use super::strategy::{abcd, assemble_strategy_decomposed, lambda_map};
use crate::error::{invalid, Result};
use crate::qcore::eigen::{symmetric_eigenvalues_desc, EigOptions};
use crate::qcore::sector::SectorOperator;
use crate::symcomb::{binom_f64, central_binom, johnson_multiplicity};

/// Which candidate is the second largest eigenvalue of the first component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaBranch {
    /// `beta = a = p + (1-p) lambda0`.
    A,
    /// `beta = 1 - 2(1-p) lambda0 / C(2n,n) - 1/(2n-1)`.
    Bc1,
    /// Both candidates coincide.
    Boundary,
}

/// An eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub value: f64,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericResiduals {
    /// Largest deviation over the full spectrum of the first component.
    pub omega1: f64,
    /// Deviation of the top eigenvalue of the second component.
    pub omega2: f64,
    /// Largest deviation over the (diagonal) third component.
    pub omega3: f64,
    /// Deviation of the top two eigenvalues of the whole strategy from `(1, beta)`.
    pub total: f64,
    /// `max` of the above.
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub n: usize,
    pub q0: f64,
    pub p: f64,
    pub lambda0: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// `Lambda(Omega1, a)`.
    pub lambda_a: f64,
    /// `Lambda(Omega1, b, c, l)` for `l = 1..=n`.
    pub lambda_bc: Vec<Eigenvalue>,
    pub omega2_top: f64,
    /// `Lambda(Omega3, l)` for `l = 1..=n-2`.
    pub omega3_profile: Vec<f64>,
    /// Largest eigenvalue of the third component (0 when it is empty).
    pub omega3_top: f64,
    pub beta: f64,
    pub nu: f64,
    pub branch: BetaBranch,
    pub residuals: Option<NumericResiduals>,
}

/// `Lambda(Omega3, l) = (1-p)/(n C) C(2n-l, n) [n lambda0 - l(2 lambda0 - 1)]`,
/// `l = 1..=n-2`.
pub fn omega3_profile(n: usize, q0: f64, p: f64) -> Result<Vec<f64>> {
    let (l0, _) = lambda_map(n, q0)?;
    let nf = n as f64;
    let c_big = central_binom(n);
    Ok((1..n.saturating_sub(1))
        .map(|l| {
            let lf = l as f64;
            (1.0 - p) / (nf * c_big) * binom_f64((2 * n - l) as u64, n as u64) * (nf * l0 - lf * (2.0 * l0 - 1.0))
        })
        .collect())
}

pub fn analytic_spectrum(n: usize, q0: f64, p: f64) -> Result<SpectralSummary> {
    if !(0.0..1.0).contains(&p) {
        return Err(invalid("p", format!("{p} not in [0,1)")));
    }
    let (l0, l1) = lambda_map(n, q0)?;
    let (a, b, c, d) = abcd(n, q0, p)?;
    let nf = n as f64;
    let c_big = central_binom(n);

    // eigenvectors alpha(|0..0> + |1..1>) + sum_{|z|=n} |z>
    let big_b = b + c * nf * nf;
    let disc = ((big_b - a).powi(2) + 8.0 * d * d * c_big).sqrt();
    let (alpha_plus, alpha_minus) = if d > 0.0 {
        ((a - big_b + disc) / (4.0 * d), (a - big_b - disc) / (4.0 * d))
    } else {
        (f64::INFINITY, 0.0)
    };
    let lambda_plus = 1.0;
    let lambda_minus = p + l0 * (1.0 - p) * (1.0 - 2.0 / c_big);

    let lambda_bc: Vec<Eigenvalue> = (1..=n)
        .map(|l| Eigenvalue {
            value: 1.0
                - 2.0 * (1.0 - p) * l0 / c_big
                - (l * (2 * n + 1 - l)) as f64 / (2.0 * nf * (2.0 * nf - 1.0)),
            multiplicity: johnson_multiplicity(2 * n, l),
        })
        .collect();
    let bc1 = lambda_bc[0].value;

    let omega2_top = (nf + 1.0) / (2.0 * (2.0 * nf - 1.0))
        + (1.0 - p) * (nf + 1.0) / c_big * (1.0 - 1.0 / nf - (1.0 - 2.0 / nf) * l0);
    let profile = omega3_profile(n, q0, p)?;
    let omega3_top = profile.iter().copied().fold(0.0, f64::max);

    let lhs = l0 * (1.0 + 2.0 / c_big) + 1.0 / ((2.0 * nf - 1.0) * (1.0 - p));
    let branch = if (lhs - 1.0).abs() <= 1e-14 {
        BetaBranch::Boundary
    } else if lhs > 1.0 {
        BetaBranch::A
    } else {
        BetaBranch::Bc1
    };
    // gaps from their own closed forms rather than 1 - beta, which cancels
    let nu_a = (1.0 - p) * l1;
    let nu_bc1 = 1.0 / (2.0 * nf - 1.0) + 2.0 * (1.0 - p) * l0 / c_big;
    let (beta, nu) = match branch {
        BetaBranch::A => (a, nu_a),
        BetaBranch::Bc1 => (bc1, nu_bc1),
        BetaBranch::Boundary => (a.max(bc1), nu_a.min(nu_bc1)),
    };
    Ok(SpectralSummary {
        n,
        q0,
        p,
        lambda0: l0,
        a,
        b,
        c,
        d,
        alpha_plus,
        alpha_minus,
        lambda_plus,
        lambda_minus,
        lambda_a: a,
        lambda_bc,
        omega2_top,
        omega3_profile: profile,
        omega3_top,
        beta,
        nu,
        branch,
        residuals: None,
    })
}

/// Limit on coupled-group dimension for full dense comparison.
const FULL_SPECTRUM_LIMIT: usize = 4096;

impl SpectralSummary {
    /// Full analytic spectrum of the first component on sectors `0, n, 2n`,
    /// largest first, multiplicities expanded.
    pub fn omega1_spectrum(&self) -> Vec<f64> {
        let mut v = vec![self.lambda_plus, self.lambda_minus, self.lambda_a];
        for e in &self.lambda_bc {
            v.extend(std::iter::repeat_n(e.value, e.multiplicity as usize));
        }
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// The four comparisons that make `beta` the second largest eigenvalue of
    /// the whole strategy: `(omega2 < bc1, omega2 <= a, omega3 < bc1, omega3 < a)`.
    pub fn orderings(&self) -> [bool; 4] {
        let bc1 = self.lambda_bc[0].value;
        let tol = 1e-12;
        [
            self.omega2_top < bc1,
            self.omega2_top <= self.lambda_a + tol,
            self.omega3_top < bc1,
            self.omega3_top < self.lambda_a,
        ]
    }

    pub fn orderings_hold(&self) -> bool {
        self.orderings().iter().all(|&b| b)
    }

    /// Compares against numeric diagonalization of the assembled operators.
    pub fn with_residuals(mut self, opts: &EigOptions) -> Result<Self> {
        let dec = assemble_strategy_decomposed(self.n, self.q0, self.p)?;
        let n = self.n;
        let m = 2 * n;

        let group1 = dec.omega1.restrict(&[0, n, m]);
        let omega1 = if group1.rows() <= FULL_SPECTRUM_LIMIT {
            let num = symmetric_eigenvalues_desc(&group1.to_dense());
            let ana = self.omega1_spectrum();
            if num.len() != ana.len() {
                return Err(invalid("spectrum", "eigenvalue count mismatch"));
            }
            num.iter().zip(&ana).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        } else {
            let (l1, l2) = dec.omega1.top2(opts)?;
            let second = self.lambda_a.max(self.lambda_bc[0].value).max(self.lambda_minus);
            (l1 - 1.0).abs().max((l2 - second).abs())
        };

        let group2 = dec.omega2.restrict(&[n - 1, n + 1]);
        let omega2 = {
            let (l1, _) = top2_of(&group2, opts)?;
            (l1 - self.omega2_top).abs()
        };

        let mut omega3 = 0.0f64;
        for (i, &want) in self.omega3_profile.iter().enumerate() {
            let l = i + 1;
            for w in [l, m - l] {
                let block = dec.omega3.block(w, w).expect("diagonal block present");
                for r in 0..block.rows() {
                    omega3 = omega3.max((block.get(r, r) - want).abs());
                }
            }
        }

        let total_op: SectorOperator = dec.total();
        let (t1, t2) = total_op.top2(opts)?;
        let total = (t1 - 1.0).abs().max((t2 - self.beta).abs());

        let max = omega1.max(omega2).max(omega3).max(total);
        self.residuals = Some(NumericResiduals {
            omega1,
            omega2,
            omega3,
            total,
            max,
        });
        Ok(self)
    }
}

fn top2_of(block: &crate::sparse::CsrMatrix, opts: &EigOptions) -> Result<(f64, f64)> {
    if block.rows() <= opts.dense_limit {
        let v = symmetric_eigenvalues_desc(&block.to_dense());
        Ok((v[0], v[1]))
    } else {
        crate::qcore::eigen::eig_top2_with(block, opts)
    }
}
