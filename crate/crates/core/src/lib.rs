//! Simulation and verification toolkit for anonymous quantum sensing.
//!
//! A `2n`-qubit superposition of a GHZ state and a Dicke state with `n`
//! excitations is distributed to `2n` sensors. Two of them pick up phases,
//! and a symmetric four-outcome POVM reveals the sum and difference of the
//! phases without revealing *who* picked them up.
//!
//! The crate covers:
//!
//! - [`symcomb`]: exact binomials, Hamming-weight bases and Johnson graphs.
//! - [`qcore`]: state vectors, noise channels, Born-rule sampling and the
//!   eigensolver used as a numeric oracle.
//! - [`sensing`]: outcome statistics, estimators and Cramér–Rao bounds.
//! - [`qsv`]: verification strategies for the resource state, their spectra
//!   in closed form, the executable verification protocol and the composed
//!   noise-robust sensing loop.
//! - [`qopt`]: choice of the GHZ weight `q0` that balances sensitivity and
//!   verification cost.

pub mod error;
pub mod qcore;
pub mod qopt;
pub mod qsv;
pub mod sensing;
pub mod sparse;
pub mod symcomb;

pub use error::{Error, Result};
pub use qcore::{
    channel::{ChannelKind, KrausChannel},
    density::DensityOperator,
    rng::RngStream,
    sector::SectorOperator,
    state::PureState,
};
pub use qopt::{AngleExample, OptimumReport, SweepRow};
pub use qsv::{
    protocol::{CopyVerdict, SessionTranscript, VerificationPlan},
    spectrum::SpectralSummary,
    strategy::GhzLikeParams,
};
pub use sensing::{OutcomeDistribution, SensingScenario, SensitivityBound};

/// Strategy operators are weight-sector operators.
pub type StrategyOperator = SectorOperator;
