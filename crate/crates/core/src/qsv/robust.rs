//! Verification composed with sensing: every sensing round is preceded by a
//! successful verification of `M` fresh copies, and a rejected batch
//! restarts the round before any field interaction.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::protocol::{verify_batch, CopySource, NoisySource, VerificationPlan};
use crate::error::{invalid, Result};
use crate::qcore::channel::KrausChannel;
use crate::qcore::measure::sample_index;
use crate::qcore::state::evolve_phases;
use crate::sensing::{build_povm, estimate_angles, OutcomeDistribution, SensingScenario};

pub const DEFAULT_RESTART_CAP: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobustStatus {
    Completed,
    RestartCapExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: u64,
    pub accepted: bool,
    /// Copies verified before the verdict.
    pub copies_checked: u64,
    /// Sensing outcome (0-based) when the batch was accepted.
    pub outcome: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleEstimate {
    pub theta_plus: f64,
    /// Magnitude of `theta-`; its sign is negative by convention.
    pub theta_minus_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustOutcome {
    pub status: RobustStatus,
    pub rounds_requested: u64,
    pub rounds_completed: u64,
    pub restarts: u64,
    pub copies_consumed: u64,
    pub counts: [u64; 4],
    pub estimate: Option<AngleEstimate>,
    /// Why no estimate was produced, if rounds were completed.
    pub estimate_error: Option<String>,
    pub attempts: Vec<AttemptRecord>,
}

pub fn run_robust_protocol<R: RngCore>(
    scenario: &SensingScenario,
    plan: &VerificationPlan,
    noise: &KrausChannel,
    rounds: u64,
    restart_cap: u64,
    rng: &mut R,
) -> Result<RobustOutcome> {
    let mut source = NoisySource::noisy_target(scenario.n, scenario.q0, noise.clone())?;
    run_with_source(scenario, plan, &mut source, rounds, restart_cap, rng)
}

/// Like [`run_robust_protocol`] with an arbitrary copy source.
pub fn run_with_source<S: CopySource + ?Sized, R: RngCore>(
    scenario: &SensingScenario,
    plan: &VerificationPlan,
    source: &mut S,
    rounds: u64,
    restart_cap: u64,
    rng: &mut R,
) -> Result<RobustOutcome> {
    scenario.validate()?;
    plan.validate()?;
    if plan.n != scenario.n || plan.q0 != scenario.q0 {
        return Err(invalid("plan", "plan and scenario disagree on n or q0"));
    }
    let povm = build_povm(scenario.n)?;
    let omegas = scenario.omegas();

    let mut out = RobustOutcome {
        status: RobustStatus::Completed,
        rounds_requested: rounds,
        rounds_completed: 0,
        restarts: 0,
        copies_consumed: 0,
        counts: [0; 4],
        estimate: None,
        estimate_error: None,
        attempts: Vec::new(),
    };
    let mut attempt = 0u64;
    while out.rounds_completed < rounds {
        let session = verify_batch(source, plan, rng)?;
        let checked = session.verdicts.len() as u64;
        out.copies_consumed += checked;
        if !session.accepted {
            out.attempts.push(AttemptRecord {
                attempt,
                accepted: false,
                copies_checked: checked,
                outcome: None,
            });
            attempt += 1;
            out.restarts += 1;
            if out.restarts >= restart_cap {
                out.status = RobustStatus::RestartCapExhausted;
                return Ok(out);
            }
            continue;
        }
        let copy = source.next_copy(rng)?;
        out.copies_consumed += 1;
        let evolved = evolve_phases(&copy, &omegas, scenario.t)?;
        let probs = povm.probabilities(&evolved);
        let j = sample_index(&probs.p, rng);
        out.counts[j] += 1;
        out.rounds_completed += 1;
        out.attempts.push(AttemptRecord {
            attempt,
            accepted: true,
            copies_checked: checked,
            outcome: Some(j as u8),
        });
        attempt += 1;
    }
    if rounds > 0 {
        let f = OutcomeDistribution::from_counts(&out.counts)?;
        match estimate_angles(f.p1(), f.p2(), f.p3(), scenario.n, scenario.q0) {
            Ok((theta_plus, theta_minus_abs)) => {
                out.estimate = Some(AngleEstimate {
                    theta_plus,
                    theta_minus_abs,
                })
            }
            Err(e) => out.estimate_error = Some(e.to_string()),
        }
    }
    Ok(out)
}
