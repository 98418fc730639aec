mod common;

use common::{integrate, scenario, THR};
use hqam_core::link::{
    depacketize, packetize, partition_bitplanes, psnr, recombine_bitplanes, run_session, transmit_packet,
    GrayImage, IdentityCoder, LinkParams, Modulation, Packet, RetxBudget,
};
use hqam_core::power::{InstantPolicy, SolverKind};
use hqam_core::rng::seeded;
use hqam_core::{ChannelEnv, Decision, DualState, FadingSpec, PowerPolicy, Scenario, SensingModel};
use proptest::prelude::*;

fn image() -> GrayImage {
    GrayImage::synthetic(32, 32, 7).unwrap()
}

proptest! {
    #[test]
    fn bitplane_round_trip(w in 1u32..20, h in 1u32..20, seed in any::<u64>()) {
        let img = GrayImage::synthetic(w, h, seed).unwrap();
        let (hp, lp) = partition_bitplanes(&img);
        prop_assert_eq!(recombine_bitplanes(&hp, &lp, w, h).unwrap(), img);
    }

    #[test]
    fn packet_round_trip(
        hp in proptest::collection::vec(0u8..2, 1..500),
        lp in proptest::collection::vec(0u8..2, 1..500),
        n in 1usize..40,
    ) {
        let packets = packetize(&hp, &lp, n).unwrap();
        prop_assert_eq!(packets.len(), n);
        let hp_len = packets[0].hp_bits.len();
        prop_assert!(packets.iter().all(|p| p.hp_bits.len() == hp_len));
        let (a, b) = depacketize(&packets, hp.len(), lp.len()).unwrap();
        prop_assert_eq!(a, hp);
        prop_assert_eq!(b, lp);
    }
}

fn packet() -> Packet {
    Packet { index: 0, hp_bits: vec![1, 0, 1, 1, 0, 0, 1, 0], lp_bits: vec![0, 1, 1, 0, 1, 0, 0, 1] }
}

#[test]
fn zero_threshold_never_retransmits() {
    let sc = scenario(0.9, 0.1, [1.0, 1.0]);
    let params = LinkParams::new(0.0, None, Modulation::Hqam).unwrap();
    let mut rng = seeded(51);
    let mut budget = RetxBudget::new(None);
    for _ in 0..1000 {
        let o = transmit_packet(
            &packet(),
            &sc,
            &PowerPolicy::Constant([2.8, 2.4]),
            &params,
            &IdentityCoder,
            &mut budget,
            &mut rng,
        )
        .unwrap();
        assert_eq!(o.retransmissions, 0);
    }
}

#[test]
fn infinite_threshold_exhausts_cap_then_delivers() {
    let sc = scenario(0.9, 0.1, [1.0, 1.0]);
    let params = LinkParams::new(f64::INFINITY, Some(5), Modulation::Hqam).unwrap();
    let mut budget = RetxBudget::new(params.n_upper);
    let policy = PowerPolicy::Constant([2.8, 2.4]);
    let o = transmit_packet(&packet(), &sc, &policy, &params, &IdentityCoder, &mut budget, &mut seeded(52))
        .unwrap();
    assert_eq!(o.retransmissions, 5);
    assert_eq!(budget.remaining(), Some(0));
    let o = transmit_packet(&packet(), &sc, &policy, &params, &IdentityCoder, &mut budget, &mut seeded(53))
        .unwrap();
    assert_eq!(o.retransmissions, 0);

    let report = run_session(&image(), 4, &sc, &policy, &params, &mut seeded(54)).unwrap();
    assert_eq!(report.n_re, 5);
}

#[test]
fn retransmission_rate_matches_quadrature() {
    let sc = scenario(0.9, 0.1, [1.0, 1.0]);
    let powers = [2.796, 2.390];
    // Pr{P_i|h|² < thr} over exponential |h|² and the decision mixture
    let j = sc.sensing.joint();
    let q: f64 = Decision::ALL
        .iter()
        .map(|&d| j.decision_prob(d) * integrate(|z: f64| (-z).exp(), 0.0, THR / powers[d.index()]))
        .sum();
    let params = LinkParams::new(THR, None, Modulation::Hqam).unwrap();
    let img = GrayImage::synthetic(16, 16, 3).unwrap();
    let report =
        run_session(&img, 10_000, &sc, &PowerPolicy::Constant(powers), &params, &mut seeded(55)).unwrap();
    let n = report.n_attempts as f64;
    let rate = report.n_re as f64 / n;
    let sd = (q * (1.0 - q) / n).sqrt();
    assert!((rate - q).abs() <= 3.0 * sd, "{rate} vs {q}");
}

#[test]
fn noiseless_session_is_lossless() {
    let env = ChannelEnv::new(1e-12, 0.0, FadingSpec::rayleigh(), FadingSpec::rayleigh(), 0.0).unwrap();
    let sc = Scenario::new(SensingModel::new(0.9, 0.1, 0.4).unwrap(), env, [1.0, 1.0]).unwrap();
    let params = LinkParams::new(0.0, None, Modulation::Hqam).unwrap();
    let img = image();
    let r = run_session(&img, 16, &sc, &PowerPolicy::Constant([1.0, 1.0]), &params, &mut seeded(56)).unwrap();
    assert_eq!(r.psnr, f64::INFINITY);
    assert_eq!(r.n_re, 0);
    assert_eq!(r.received, img);
    assert_eq!(r.ber_hp_emp, 0.0);
}

#[test]
fn inverted_image_has_zero_psnr() {
    let black = GrayImage::new(4, 4, vec![0; 16]).unwrap();
    let white = GrayImage::new(4, 4, vec![255; 16]).unwrap();
    assert_eq!(psnr(&black, &white).unwrap(), 0.0);
}

#[test]
fn energy_is_power_times_symbols_over_attempts() {
    // the decision is always idle, so every attempt uses P₀
    let sc = Scenario::new(SensingModel::perfect(0.0).unwrap(), common::default_env(), [1.0, 1.0]).unwrap();
    let params = LinkParams::new(THR, None, Modulation::Hqam).unwrap();
    let img = image();
    let n_packets = 8;
    let r = run_session(&img, n_packets, &sc, &PowerPolicy::Constant([2.0, 5.0]), &params, &mut seeded(57))
        .unwrap();
    let (hp, lp) = partition_bitplanes(&img);
    let symbols = packetize(&hp, &lp, n_packets).unwrap()[0].symbols() as f64;
    assert!(r.n_re > 0);
    assert_eq!(r.n_attempts, r.n_re + n_packets as u64);
    assert_eq!(r.energy, 2.0 * symbols * r.n_attempts as f64);
    assert_eq!(r.avg_power, 2.0);
}

#[test]
fn silent_slots_cost_nothing() {
    let sc = scenario(0.9, 0.1, [1.0, 1.0]);
    let pol =
        InstantPolicy::new(sc, 0.5, DualState { mu1: 0.1, mu2: 0.05 }, 10.0, SolverKind::Exact, Some(0.5))
            .unwrap();
    let params = LinkParams::new(0.0, Some(0), Modulation::Hqam).unwrap();
    let r =
        run_session(&image(), 32, &sc, &PowerPolicy::Instantaneous(pol), &params, &mut seeded(58)).unwrap();
    assert!(r.n_silent > 0);
    assert_eq!(r.n_re, 0);
    assert_eq!(r.n_attempts, 32);
    assert!(r.avg_power > 0.0);
}

#[test]
fn sessions_are_seed_deterministic() {
    let sc = scenario(0.9, 0.1, [1.0, 1.0]);
    let params = LinkParams::new(THR, Some(20), Modulation::Hqam).unwrap();
    let run = |seed| {
        run_session(&image(), 16, &sc, &PowerPolicy::Constant([2.8, 2.4]), &params, &mut seeded(seed))
            .unwrap()
    };
    assert_eq!(run(59), run(59));
}

#[test]
fn hqam_beats_conventional_qam_in_image_quality() {
    let sc = scenario(0.9, 0.1, [1.0, 1.0]);
    let policy = PowerPolicy::Constant([2.796, 2.390]);
    let img = GrayImage::synthetic(48, 48, 11).unwrap();
    let mut wins = 0;
    for seed in 0..50 {
        let run = |m| {
            let params = LinkParams::new(THR, Some(100), m).unwrap();
            run_session(&img, 32, &sc, &policy, &params, &mut seeded(1000 + seed)).unwrap()
        };
        let (h, q) = (run(Modulation::Hqam), run(Modulation::Qam));
        if h.psnr >= q.psnr {
            wins += 1;
        }
    }
    assert!(wins >= 40, "HQAM ahead in {wins}/50 sessions");
}
