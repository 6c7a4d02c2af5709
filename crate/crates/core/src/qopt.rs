//! Choice of the GHZ weight `q0`.
//!
//! A larger `q0` improves the sensitivity to `theta+` but shrinks the
//! verification gap; the objective `H(q0) = G+ G- beta` (at `p = 0`) trades
//! the two off.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qsv::strategy::q_min;
use crate::sensing::sensitivity_bounds;
use crate::symcomb::central_binom;

pub const GRID_POINTS: usize = 2048;
pub const BRACKET_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleExample {
    pub label: char,
    pub theta_plus: f64,
    pub theta_minus: f64,
}

const EXAMPLES: [(char, f64, f64); 12] = [
    ('A', PI / 4.0, -PI / 6.0),
    ('B', PI / 3.0, -PI / 6.0),
    ('C', PI / 2.0, -PI / 6.0),
    ('D', 2.0 * PI / 3.0, -PI / 6.0),
    ('E', 3.0 * PI / 4.0, -PI / 6.0),
    ('F', 5.0 * PI / 6.0, -PI / 6.0),
    ('G', PI / 3.0, -PI / 4.0),
    ('H', PI / 2.0, -PI / 4.0),
    ('I', 2.0 * PI / 3.0, -PI / 4.0),
    ('J', 3.0 * PI / 4.0, -PI / 4.0),
    ('K', PI / 2.0, -PI / 3.0),
    ('L', 2.0 * PI / 3.0, -PI / 3.0),
];

impl AngleExample {
    pub fn all() -> Vec<Self> {
        EXAMPLES
            .iter()
            .map(|&(label, theta_plus, theta_minus)| Self {
                label,
                theta_plus,
                theta_minus,
            })
            .collect()
    }

    pub fn by_label(label: char) -> Option<Self> {
        Self::all().into_iter().find(|e| e.label == label.to_ascii_uppercase())
    }

    /// Parses `A..L`, `A-C`, `A,C,K` or any comma-separated mix.
    pub fn parse_list(spec: &str) -> Result<Vec<Self>> {
        let mut out: Vec<Self> = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let range = part.split_once("..").or_else(|| part.split_once('-'));
            let (lo, hi) = match range {
                Some((a, b)) => (one_char(a)?, one_char(b)?),
                None => (one_char(part)?, one_char(part)?),
            };
            if lo > hi {
                return Err(invalid("examples", format!("empty range `{part}`")));
            }
            for c in lo..=hi {
                let e = Self::by_label(c).ok_or_else(|| invalid("examples", format!("unknown example `{c}`")))?;
                if !out.iter().any(|x| x.label == e.label) {
                    out.push(e);
                }
            }
        }
        if out.is_empty() {
            return Err(invalid("examples", "no examples selected"));
        }
        Ok(out)
    }
}

fn one_char(s: &str) -> Result<char> {
    let mut it = s.trim().chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c.to_ascii_uppercase()),
        _ => Err(invalid("examples", format!("bad label `{s}`"))),
    }
}

/// `gamma = n^2 sin^2(t-/2) + 2(n^2 - n)(1 - cos(t+/2) cos(t-/2))`,
/// `eta = (n-1)^2 sin^2(t+/2)`.
pub fn gamma_eta(n: usize, theta_plus: f64, theta_minus: f64) -> (f64, f64) {
    let nf = n as f64;
    let gamma = nf * nf * (theta_minus / 2.0).sin().powi(2)
        + 2.0 * (nf * nf - nf) * (1.0 - (theta_plus / 2.0).cos() * (theta_minus / 2.0).cos());
    let eta = (nf - 1.0).powi(2) * (theta_plus / 2.0).sin().powi(2);
    (gamma, eta)
}

/// Crossing point of the two branches of `beta` at `p = 0`.
pub fn q_beta(n: usize) -> f64 {
    4.0 * (n as f64 - 1.0) / (central_binom(n) + 8.0 * n as f64 - 6.0)
}

/// Minimizer of `G-` over `q0`.
pub fn q_g(n: usize, theta_plus: f64, theta_minus: f64) -> f64 {
    let (gamma, eta) = gamma_eta(n, theta_plus, theta_minus);
    let r = eta / gamma;
    (r * (1.0 + r)).sqrt() - r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    pub q_min: f64,
    pub q_beta: f64,
    pub q_g: f64,
}

pub fn q_landmarks(n: usize, theta_plus: f64, theta_minus: f64) -> Landmarks {
    Landmarks {
        q_min: q_min(n),
        q_beta: q_beta(n),
        q_g: q_g(n, theta_plus, theta_minus),
    }
}

/// Second largest eigenvalue of the strategy at `p = 0` as a function of `q0`.
pub fn beta_p0(n: usize, q0: f64) -> Result<f64> {
    if n < 3 {
        return Err(invalid("n", "need n >= 3"));
    }
    let qm = q_min(n);
    if !(q0 >= qm * (1.0 - 1e-12) && q0 < 1.0) {
        return Err(invalid("q0", format!("{q0} outside [q_min, 1) = [{qm}, 1)")));
    }
    let c = central_binom(n);
    let den = 2.0 + (c - 2.0) * q0;
    if q0 < q_beta(n) {
        Ok(1.0 - 1.0 / (2.0 * n as f64 - 1.0) - 2.0 * q0 / den)
    } else {
        Ok(c * q0 / den)
    }
}

/// `H(q0) = G+ G- beta|_{p=0}`.
pub fn objective_h(n: usize, q0: f64, theta_plus: f64, theta_minus: f64) -> Result<f64> {
    let g = sensitivity_bounds(n, q0, theta_plus, theta_minus)?;
    Ok(g.g_plus * g.g_minus * beta_p0(n, q0)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub n: usize,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub q_min: f64,
    pub q_beta: f64,
    pub q_g: f64,
    pub q_h: f64,
    pub h_min: f64,
    /// Set when `q_beta >= q_G`: the search then covers the whole domain.
    pub flagged: bool,
    /// Objective evaluations.
    pub evaluations: usize,
    /// Final golden-section bracket around `q_h`.
    pub bracket: (f64, f64),
    /// Interior local minima seen on the coarse grid.
    pub grid_minima: usize,
}

/// Minimizes `f` over `[lo, 1)`: coarse grid, then golden-section search in
/// the bracket around every grid-local minimum; the best refinement wins.
fn minimize_on<F: Fn(f64) -> Result<f64>>(lo: f64, f: F) -> Result<(f64, f64, (f64, f64), usize, usize)> {
    let hi = 1.0;
    let step = (hi - lo) / GRID_POINTS as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + step * i as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&q| f(q)).collect::<Result<_>>()?;
    let mut evaluations = grid.len();
    let last = grid.len() - 1;
    let minima: Vec<usize> = (0..grid.len())
        .filter(|&i| (i == 0 || vals[i] <= vals[i - 1]) && (i == last || vals[i] <= vals[i + 1]))
        .collect();
    if minima.is_empty() {
        return Err(Error::NoConvergence { iterations: evaluations });
    }
    let mut best: Option<(f64, f64, (f64, f64))> = None;
    for &i in &minima {
        let a = if i == 0 { lo } else { grid[i - 1] };
        let b = if i == last { hi - step * 1e-3 } else { grid[i + 1] };
        let (x, fx, br, used) = golden_section(&f, a, b)?;
        evaluations += used;
        let cand = if fx <= vals[i] { (x, fx, br) } else { (grid[i], vals[i], br) };
        if best.is_none_or(|(_, fb, _)| cand.1 < fb) {
            best = Some(cand);
        }
    }
    let (x, fx, br) = best.expect("at least one minimum");
    Ok((x, fx, br, evaluations, minima.len()))
}

fn golden_section<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64) -> Result<(f64, f64, (f64, f64), usize)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut used = 2;
    while b - a > BRACKET_TOLERANCE {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        used += 1;
    }
    let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    Ok((x, fx, (a, b), used))
}

pub fn minimize_h(n: usize, theta_plus: f64, theta_minus: f64) -> Result<OptimumReport> {
    let lm = q_landmarks(n, theta_plus, theta_minus);
    let flagged = lm.q_beta >= lm.q_g;
    let lo = if flagged { lm.q_min } else { lm.q_g };
    let (q_h, h_min, bracket, evaluations, grid_minima) =
        minimize_on(lo, |q| objective_h(n, q, theta_plus, theta_minus))?;
    Ok(OptimumReport {
        n,
        theta_plus,
        theta_minus,
        q_min: lm.q_min,
        q_beta: lm.q_beta,
        q_g: lm.q_g,
        q_h,
        h_min,
        flagged,
        evaluations,
        bracket,
        grid_minima,
    })
}

/// Unrestricted minimizer over `[q_min, 1)`, used to check that the
/// restriction to `[q_G, 1)` loses nothing.
pub fn minimize_h_global(n: usize, theta_plus: f64, theta_minus: f64) -> Result<(f64, f64)> {
    let (q, h, ..) = minimize_on(q_min(n), |q| objective_h(n, q, theta_plus, theta_minus))?;
    Ok((q, h))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub label: char,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub q_min: f64,
    pub q_beta: f64,
    pub q_g: f64,
    pub q_h: f64,
    pub h_min: f64,
    pub flagged: bool,
}

/// One row per `(n, example)`, `n` outer.
pub fn sweep(n_min: usize, n_max: usize, examples: &[AngleExample]) -> Result<Vec<SweepRow>> {
    if n_min < 3 || n_min > n_max {
        return Err(invalid("n", format!("need 3 <= n_min <= n_max, got {n_min}..{n_max}")));
    }
    let mut rows = Vec::with_capacity((n_max - n_min + 1) * examples.len());
    for n in n_min..=n_max {
        for e in examples {
            let r = minimize_h(n, e.theta_plus, e.theta_minus)?;
            rows.push(SweepRow {
                n,
                label: e.label,
                theta_plus: e.theta_plus,
                theta_minus: e.theta_minus,
                q_min: r.q_min,
                q_beta: r.q_beta,
                q_g: r.q_g,
                q_h: r.q_h,
                h_min: r.h_min,
                flagged: r.flagged,
            });
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "n,label,theta_plus,theta_minus,q_min,q_beta,q_G,q_H,H_min";

pub fn write_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.label,
            fmt_sig(r.theta_plus, 12),
            fmt_sig(r.theta_minus, 12),
            fmt_sig(r.q_min, 12),
            fmt_sig(r.q_beta, 12),
            fmt_sig(r.q_g, 12),
            fmt_sig(r.q_h, 12),
            fmt_sig(r.h_min, 12),
        )?;
    }
    Ok(())
}

/// C-style `%.{digits}g`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
