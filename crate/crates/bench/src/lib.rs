//! Shared fixtures for the benchmarks.

use hqam_core::{ChannelEnv, FadingSpec, Scenario, SensingModel};

/// Default system: σₙ² = 0.01, σ_w² = 0.5, busy prior 0.4, Rayleigh links.
pub fn scenario(p_d: f64, p_f: f64, alpha: f64) -> Scenario {
    let env =
        ChannelEnv::new(0.01, 0.5, FadingSpec::rayleigh(), FadingSpec::rayleigh(), 0.0).expect("valid env");
    let sensing = SensingModel::new(p_d, p_f, 0.4).expect("valid sensing");
    Scenario::new(sensing, env, [alpha, alpha]).expect("valid scenario")
}
