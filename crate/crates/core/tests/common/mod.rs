#![allow(dead_code)]

use hqam_core::{ChannelEnv, FadingSpec, Scenario, SensingModel};

/// Double-exponential quadrature on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, 1e-14).integral
}

/// `∫₀^∞ f`, split at `breaks` (increasing, positive). The last piece is
/// mapped onto `(0, 1]` by `z = b/t`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, breaks: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut lo = 0.0;
    for &b in breaks {
        total += integrate(&f, lo, b);
        lo = b;
    }
    let b = lo;
    total + integrate(|t: f64| if t <= 0.0 { 0.0 } else { f(b / t) * b / (t * t) }, 0.0, 1.0)
}

/// `E[f(Z)]` for `Z ~ Gamma(m, Ω/m)`, independent of the library's density.
pub fn gamma_expectation<F: Fn(f64) -> f64>(f: F, m: f64, omega: f64) -> f64 {
    let theta = omega / m;
    let ln_norm = -libm::lgamma(m) - m * theta.ln();
    let pdf = move |z: f64| {
        if z <= 0.0 {
            0.0
        } else {
            ((m - 1.0) * z.ln() - z / theta + ln_norm).exp()
        }
    };
    let breaks: Vec<f64> = [1e-8, 1e-6, 1e-4, 1e-2, 0.1, 1.0, 4.0].iter().map(|b| b * omega).collect();
    integrate_half_line(|z| pdf(z) * f(z), &breaks)
}

/// Standard normal tail by quadrature of the density.
pub fn q_quad(x: f64) -> f64 {
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if x >= 0.0 {
        integrate(phi, x, x + 40.0)
    } else {
        1.0 - integrate(phi, -x, -x + 40.0)
    }
}

pub const SIGMA_N2: f64 = 0.01;
pub const SIGMA_W2: f64 = 0.5;
pub const PRIOR_BUSY: f64 = 0.4;
pub const THR: f64 = 1.8;

pub fn default_env() -> ChannelEnv {
    ChannelEnv::new(SIGMA_N2, SIGMA_W2, FadingSpec::rayleigh(), FadingSpec::rayleigh(), 0.0).unwrap()
}

pub fn scenario(p_d: f64, p_f: f64, alpha: [f64; 2]) -> Scenario {
    let s = SensingModel::new(p_d, p_f, PRIOR_BUSY).unwrap();
    Scenario::new(s, default_env(), alpha).unwrap()
}

pub fn perfect_scenario() -> Scenario {
    Scenario::new(SensingModel::perfect(PRIOR_BUSY).unwrap(), default_env(), [1.0, 1.0]).unwrap()
}

/// Within `k` standard errors, with a floor for near-zero rates.
pub fn within_sigma(emp: f64, expected: f64, n: f64, k: f64) -> bool {
    let sd = (expected * (1.0 - expected) / n).sqrt().max(1.0 / n);
    (emp - expected).abs() <= k * sd
}
