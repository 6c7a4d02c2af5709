use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use aqsv_core::qcore::eigen::EigOptions;
use aqsv_core::qopt::{self, AngleExample};
use aqsv_core::qsv::complexity::{exact_copies, sample_complexity};
use aqsv_core::qsv::protocol::{verify_batch, NoisySource};
use aqsv_core::qsv::robust::{run_robust_protocol, AngleEstimate, RobustStatus};
use aqsv_core::qsv::spectrum::analytic_spectrum;
use aqsv_core::sensing::{
    analytic_probs, anonymity_audit, estimate_angles, sample_run, sensitivity_bounds, simulate_probs, AuditReport,
};
use aqsv_core::{
    Error, OutcomeDistribution, RngStream, SensingScenario, SensitivityBound, SpectralSummary, VerificationPlan,
};

use crate::{
    Command, ComplexityArgs, FieldArgs, OptArgs, QsvCommand, RobustArgs, SenseArgs, SpectrumArgs, VerifyArgs,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NUMERIC: u8 = 2;
pub const EXIT_REJECTED: u8 = 3;
pub const EXIT_RESTART_CAP: u8 = 4;

/// Largest register simulated as a state vector in `sense`.
const SIMULATE_MAX_N: usize = 8;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. }
            | Error::WrongWeight { .. }
            | Error::DimensionMismatch { .. }
            | Error::TooLarge { .. } => EXIT_USAGE,
            Error::GhzCollapse => EXIT_REJECTED,
            Error::RestartCapExhausted { .. } => EXIT_RESTART_CAP,
            Error::NotHermitian { .. }
            | Error::NoConvergence { .. }
            | Error::IncompleteProjectors { .. }
            | Error::SourceExhausted { .. }
            | Error::Transcript(_) => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::usage(format!("i/o: {e}"))
    }
}

type Outcome = Result<u8, Failure>;

pub fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Sense(a) => sense(a),
        Command::Qsv(QsvCommand::Spectrum(a)) => spectrum(a),
        Command::Qsv(QsvCommand::Verify(a)) => verify(a),
        Command::Qsv(QsvCommand::Complexity(a)) => complexity(a),
        Command::Opt(a) => opt(a),
        Command::Robust(a) => robust(a),
    }
}

fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let mut w = open_out(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::usage(format!("json: {e}")))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::usage(format!("{what} samples randomness: pass --seed")))
}

fn scenario(n: usize, q0: f64, f: &FieldArgs) -> Result<SensingScenario, Failure> {
    let (wa, wb) = match (f.example, f.omega_a, f.omega_b) {
        (Some(label), _, _) => {
            let e = AngleExample::by_label(label).ok_or_else(|| Failure::usage(format!("unknown example `{label}`")))?;
            (
                (e.theta_plus + e.theta_minus) / (2.0 * f.t),
                (e.theta_plus - e.theta_minus) / (2.0 * f.t),
            )
        }
        (None, Some(a), Some(b)) => (a, b),
        _ => return Err(Failure::usage("give --omega-a and --omega-b, or --example")),
    };
    Ok(SensingScenario::new(n, q0, f.t1, f.t2, wa, wb, f.t)?)
}

#[derive(Serialize)]
struct SenseReport {
    scenario: SensingScenario,
    theta_plus: f64,
    theta_minus: f64,
    analytic: OutcomeDistribution,
    /// From the state vector; omitted above `n = 8`.
    simulated: Option<OutcomeDistribution>,
    shots: u64,
    seed: Option<u64>,
    counts: Option<[u64; 4]>,
    estimate: Option<AngleEstimate>,
    estimate_error: Option<String>,
    bounds: SensitivityBound,
    audit: Option<AuditReport>,
}

fn sense(a: SenseArgs) -> Outcome {
    let s = scenario(a.n, a.q0, &a.field)?;
    let analytic = analytic_probs(s.n, s.q0, s.theta_plus(), s.theta_minus())?;
    let simulated = if s.n <= SIMULATE_MAX_N {
        Some(simulate_probs(&s)?)
    } else {
        None
    };
    let bounds = sensitivity_bounds(s.n, s.q0, s.theta_plus(), s.theta_minus())?;
    let audit = if a.audit {
        Some(anonymity_audit(s.n, s.q0, s.omega_a, s.omega_b, s.t)?)
    } else {
        None
    };
    let mut report = SenseReport {
        scenario: s,
        theta_plus: s.theta_plus(),
        theta_minus: s.theta_minus(),
        analytic,
        simulated,
        shots: a.shots,
        seed: a.seed,
        counts: None,
        estimate: None,
        estimate_error: None,
        bounds,
        audit,
    };
    let mut code = EXIT_OK;
    if a.shots > 0 {
        let seed = require_seed(a.seed, "sampling")?;
        let mut rng = RngStream::new(seed).rng();
        let counts = sample_run(&analytic, a.shots, &mut rng)?;
        let f = OutcomeDistribution::from_counts(&counts)?;
        report.counts = Some(counts);
        match estimate_angles(f.p1(), f.p2(), f.p3(), s.n, s.q0) {
            Ok((theta_plus, theta_minus_abs)) => {
                report.estimate = Some(AngleEstimate {
                    theta_plus,
                    theta_minus_abs,
                })
            }
            Err(e @ Error::GhzCollapse) => {
                eprintln!("warning: {e}");
                report.estimate_error = Some(e.to_string());
                code = EXIT_REJECTED;
            }
            Err(e) => return Err(e.into()),
        }
    }
    if report.audit.as_ref().is_some_and(|r| !r.passed) {
        eprintln!("error: anonymity audit failed");
        code = code.max(EXIT_NUMERIC);
    }
    emit_json(&report, a.out.out.as_deref())?;
    Ok(code)
}

#[derive(Serialize)]
struct SpectrumReport {
    #[serde(flatten)]
    summary: SpectralSummary,
    orderings_hold: bool,
}

fn spectrum(a: SpectrumArgs) -> Outcome {
    let mut summary = analytic_spectrum(a.n, a.q0, a.p)?;
    if a.check_numeric {
        summary = summary.with_residuals(&EigOptions::default())?;
    }
    let orderings_hold = summary.orderings_hold();
    let worst = summary.residuals.as_ref().map(|r| r.max);
    emit_json(
        &SpectrumReport {
            summary,
            orderings_hold,
        },
        a.out.out.as_deref(),
    )?;
    if let Some(w) = worst.filter(|w| !(*w <= a.tolerance)) {
        eprintln!("error: analytic and numeric spectra differ by {w:.3e} (tolerance {:.1e})", a.tolerance);
        return Ok(EXIT_NUMERIC);
    }
    if !orderings_hold {
        eprintln!("error: eigenvalue orderings violated");
        return Ok(EXIT_NUMERIC);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyReport {
    plan: VerificationPlan,
    noise: String,
    seed: u64,
    accepted: bool,
    copies_checked: u64,
    /// Index of the first rejected copy.
    rejected_at: Option<u64>,
    transcript: Option<String>,
}

fn verify(a: VerifyArgs) -> Outcome {
    let seed = require_seed(a.seed, "verification")?;
    let mut plan = VerificationPlan::new(a.n, a.q0, a.p, a.epsilon, a.delta)?;
    if let Some(c) = a.copies {
        plan = plan.with_copies(c);
    }
    let mut source = NoisySource::noisy_target(a.n, a.q0, a.noise.build(a.n, a.q0)?)?;
    let mut rng = RngStream::new(seed).rng();
    let session = verify_batch(&mut source, &plan, &mut rng)?;
    if let Some(path) = &a.transcript {
        let mut w = BufWriter::new(File::create(path)?);
        session.write_jsonl(&mut w)?;
        w.flush()?;
    }
    let rejected_at = session.verdicts.iter().find(|v| !v.accepted()).map(|v| v.copy);
    let report = VerifyReport {
        plan,
        noise: a.noise.to_string(),
        seed,
        accepted: session.accepted,
        copies_checked: session.verdicts.len() as u64,
        rejected_at,
        transcript: a.transcript.as_ref().map(|p| p.display().to_string()),
    };
    emit_json(&report, a.out.out.as_deref())?;
    Ok(if session.accepted { EXIT_OK } else { EXIT_REJECTED })
}

#[derive(Serialize)]
struct ComplexityReport {
    n: usize,
    q0: f64,
    p: f64,
    epsilon: f64,
    delta: f64,
    dicke_term: u64,
    ghz_term: u64,
    copies: u64,
    nu: f64,
    /// `ceil(ln delta / ln(1 - nu eps))` for the exact gap.
    exact_copies: u64,
}

fn complexity(a: ComplexityArgs) -> Outcome {
    let s = sample_complexity(a.n, a.q0, a.epsilon, a.delta, a.p)?;
    let nu = analytic_spectrum(a.n, a.q0, a.p)?.nu;
    let report = ComplexityReport {
        n: a.n,
        q0: a.q0,
        p: a.p,
        epsilon: a.epsilon,
        delta: a.delta,
        dicke_term: s.dicke_term,
        ghz_term: s.ghz_term,
        copies: s.copies,
        nu,
        exact_copies: exact_copies(nu, a.epsilon, a.delta)?,
    };
    emit_json(&report, a.out.out.as_deref())?;
    Ok(EXIT_OK)
}

fn opt(a: OptArgs) -> Outcome {
    let examples = AngleExample::parse_list(&a.examples)?;
    let rows = qopt::sweep(a.n_min, a.n_max, &examples)?;
    {
        let mut w = open_out(a.out.out.as_deref())?;
        qopt::write_csv(&rows, &mut w)?;
        w.flush()?;
    }
    match &a.out.out {
        Some(p) => println!("wrote {} rows to {}", rows.len(), p.display()),
        None => eprintln!("{} rows", rows.len()),
    }
    if a.check_monotone {
        let mut bad = Vec::new();
        for e in &examples {
            let series: Vec<_> = rows.iter().filter(|r| r.label == e.label).collect();
            for w in series.windows(2) {
                for (name, x, y) in [
                    ("q_G", w[0].q_g, w[1].q_g),
                    ("q_H", w[0].q_h, w[1].q_h),
                    ("H_min", w[0].h_min, w[1].h_min),
                ] {
                    if y <= x {
                        bad.push(format!("{} {name} at n={}", e.label, w[1].n));
                    }
                }
            }
        }
        if !bad.is_empty() {
            eprintln!("error: not increasing in n: {}", bad.join(", "));
            return Ok(EXIT_NUMERIC);
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RobustReport {
    scenario: SensingScenario,
    theta_plus: f64,
    theta_minus: f64,
    noise: String,
    seed: u64,
    copies_per_round: u64,
    status: RobustStatus,
    rounds_requested: u64,
    rounds_completed: u64,
    restarts: u64,
    copies_consumed: u64,
    counts: [u64; 4],
    estimate: Option<AngleEstimate>,
    estimate_error: Option<String>,
}

fn robust(a: RobustArgs) -> Outcome {
    let seed = require_seed(a.seed, "the robust protocol")?;
    let s = scenario(a.n, a.q0, &a.field)?;
    let plan = VerificationPlan::new(a.n, a.q0, a.p, a.epsilon, a.delta)?;
    let channel = a.noise.build(a.n, a.q0)?;
    let mut rng = RngStream::new(seed).rng();
    let out = run_robust_protocol(&s, &plan, &channel, a.rounds, a.restart_cap, &mut rng)?;
    if let Some(path) = &a.log {
        let mut w = BufWriter::new(File::create(path)?);
        for rec in &out.attempts {
            serde_json::to_writer(&mut w, rec).map_err(|e| Failure::usage(format!("json: {e}")))?;
            writeln!(w)?;
        }
        w.flush()?;
    }
    let report = RobustReport {
        scenario: s,
        theta_plus: s.theta_plus(),
        theta_minus: s.theta_minus(),
        noise: a.noise.to_string(),
        seed,
        copies_per_round: plan.copies,
        status: out.status,
        rounds_requested: out.rounds_requested,
        rounds_completed: out.rounds_completed,
        restarts: out.restarts,
        copies_consumed: out.copies_consumed,
        counts: out.counts,
        estimate: out.estimate,
        estimate_error: out.estimate_error,
    };
    emit_json(&report, a.out.out.as_deref())?;
    match out.status {
        RobustStatus::Completed => Ok(EXIT_OK),
        RobustStatus::RestartCapExhausted => {
            eprintln!(
                "error: {}; every batch of {} copies is being rejected, so the source is not delivering the \
                 target state",
                Error::RestartCapExhausted {
                    cap: a.restart_cap,
                    accepted_rounds: out.rounds_completed
                },
                plan.copies
            );
            Ok(EXIT_RESTART_CAP)
        }
    }
}
