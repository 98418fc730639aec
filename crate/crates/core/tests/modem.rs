mod common;

use std::f64::consts::PI;

use common::{default_env, perfect_scenario, scenario, within_sigma};
use hqam_core::ber::{ber_hp_instant, ber_hp_nakagami, ber_lp_instant, ber_lp_nakagami};
use hqam_core::channel::circular_gaussian;
use hqam_core::hqam::{map_detect, monte_carlo_ber, LinkChannel, MapDetector};
use hqam_core::rng::seeded;
use hqam_core::{ChannelEnv, Decision, FadingSpec, HqamConstellation, PrimaryState, SensingModel};
use num_complex::Complex64;
use rand::Rng;

/// Sensing-aware MAP rule evaluated in the linear domain over all labels,
/// first maximum wins.
fn brute_force(
    y: Complex64,
    h: Complex64,
    d: Decision,
    c: &HqamConstellation,
    s: &SensingModel,
    env: &ChannelEnv,
) -> u8 {
    let post = s.posterior(d).unwrap();
    let mut best = (0u8, f64::NEG_INFINITY);
    for k in 0..16u8 {
        let dist = (y - h * c.modulate(k)).norm_sqr();
        let like: f64 = PrimaryState::ALL
            .iter()
            .map(|&st| {
                let v = env.noise_var(st);
                post[st.index()] / (PI * v) * (-dist / v).exp()
            })
            .sum();
        if like > best.1 {
            best = (k, like);
        }
    }
    best.0
}

#[test]
fn map_matches_brute_force_mixture() {
    let s = SensingModel::new(0.9, 0.1, 0.4).unwrap();
    let env = default_env();
    let mut rng = seeded(21);
    let mut disagreements = 0;
    for i in 0..10_000 {
        let d = if i % 2 == 0 { Decision::Idle } else { Decision::Busy };
        let c = HqamConstellation::new(rng.random_range(0.5..3.0), rng.random_range(0.1..10.0)).unwrap();
        let h = Complex64::from_polar(rng.random_range(0.3..2.0), rng.random_range(0.0..2.0 * PI));
        let st = if rng.random::<f64>() < 0.5 { PrimaryState::Idle } else { PrimaryState::Busy };
        let y = h * c.modulate(rng.random_range(0..16)) + circular_gaussian(env.noise_var(st), &mut rng);
        let det = MapDetector::new(&c, d, &s, &env).unwrap();
        if det.detect(y, h).unwrap() != brute_force(y, h, d, &c, &s, &env) {
            disagreements += 1;
        }
    }
    assert_eq!(disagreements, 0);
}

#[test]
fn map_without_interference_is_nearest_neighbour() {
    let s = SensingModel::perfect(0.4).unwrap();
    let env = ChannelEnv::new(0.05, 0.0, FadingSpec::rayleigh(), FadingSpec::rayleigh(), 0.0).unwrap();
    let c = HqamConstellation::new(1.5, 2.0).unwrap();
    let mut rng = seeded(22);
    for _ in 0..100_000 {
        let h = Complex64::from_polar(rng.random_range(0.2..2.0), rng.random_range(0.0..2.0 * PI));
        let y = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        for d in Decision::ALL {
            assert_eq!(map_detect(y, h, d, &c, &s, &env).unwrap(), c.nearest(y / h));
        }
    }
}

#[test]
fn fixed_channel_hp_rate_at_one_percent() {
    let sc = perfect_scenario();
    // power where the analytic HP rate is 0.01
    let (mut lo, mut hi) = (1e-3f64, 1e3f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if ber_hp_instant(&sc, [mid, mid], 1.0) > 0.01 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = (lo * hi).sqrt();
    let c = HqamConstellation::new(1.0, p).unwrap();
    let n = 1_000_000;
    let mc = monte_carlo_ber(
        [&c, &c],
        &sc.sensing,
        &sc.env,
        LinkChannel::Fixed(Complex64::new(1.0, 0.0)),
        n,
        &mut seeded(23),
    )
    .unwrap();
    assert!(within_sigma(mc.hp, 0.01, mc.bits as f64, 3.0), "{}", mc.hp);
    let lp = ber_lp_instant(&sc, [p, p], 1.0);
    assert!(within_sigma(mc.lp, lp, mc.bits as f64, 3.0), "{} vs {lp}", mc.lp);
}

#[test]
fn rayleigh_average_matches_closed_form() {
    let sc = scenario(0.9, 0.1, [1.0, 2.0]);
    let powers = [3.0, 1.5];
    let c0 = HqamConstellation::new(1.0, powers[0]).unwrap();
    let c1 = HqamConstellation::new(2.0, powers[1]).unwrap();
    let fading = FadingSpec::rayleigh();
    let n = 10_000_000;
    let mc =
        monte_carlo_ber([&c0, &c1], &sc.sensing, &sc.env, LinkChannel::Fading(fading), n, &mut seeded(24))
            .unwrap();
    let hp = ber_hp_nakagami(&sc, powers, &fading).unwrap();
    let lp = ber_lp_nakagami(&sc, powers, &fading).unwrap();
    assert!(within_sigma(mc.hp, hp, mc.bits as f64, 3.0), "{} vs {hp}", mc.hp);
    assert!(within_sigma(mc.lp, lp, mc.bits as f64, 3.0), "{} vs {lp}", mc.lp);
}

#[test]
fn monte_carlo_is_seed_deterministic() {
    let sc = scenario(0.8, 0.2, [1.0, 1.0]);
    let c = HqamConstellation::new(1.0, 1.0).unwrap();
    let run = || {
        monte_carlo_ber(
            [&c, &c],
            &sc.sensing,
            &sc.env,
            LinkChannel::Fading(FadingSpec::rayleigh()),
            100_000,
            &mut seeded(25),
        )
        .unwrap()
    };
    assert_eq!(run(), run());
}
