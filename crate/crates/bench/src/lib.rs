//! Shared fixtures for the benchmarks.

use vnw_core::{GridSpec, ModelParams};

/// Parameter sets spanning the decay regimes.
pub fn representative_params() -> Vec<(&'static str, ModelParams)> {
    [
        ("exp", -1.0, 0.0),
        ("stretched", -1.0, 0.5),
        ("power", -3.0, 1.0),
        ("bounded", -1.0, 2.0),
    ]
    .into_iter()
    .map(|(name, a, beta)| (name, ModelParams::new(1.0, a, beta).expect("valid fixture")))
    .collect()
}

pub fn verification_grid() -> GridSpec {
    GridSpec::from_step(60.0, 1e-3).expect("valid grid")
}
