//! Benchmark fixtures shared by the bench targets.

use aqsv_core::qcore::state::make_target;
use aqsv_core::PureState;

/// Parameters used by most benches: six sensors, the worked-example weight.
pub const N: usize = 3;
pub const Q0: f64 = 0.33;

pub fn target(n: usize) -> PureState {
    make_target(n, Q0).expect("valid target")
}
