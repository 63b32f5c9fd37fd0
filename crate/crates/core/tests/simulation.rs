use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use scallop_core::dynamics::net_displacement;
use scallop_core::hysteresis::{evolve, RelayState};
use scallop_core::simulator::simulate;
use scallop_core::{lq, mintime, FluidRegime, SwimmerParams};

const H: f64 = 1e-3;

fn draw(r: &mut StdRng) -> (f64, f64, f64) {
    let th0: f64 = r.gen_range(0.1..1.4);
    let mut th1: f64 = r.gen_range(0.1..1.4);
    while (th1 - th0).abs() < 0.05 {
        th1 = r.gen_range(0.1..1.4);
    }
    (th0, th1, r.gen_range(0.05..0.5))
}

#[test]
fn opening_first_cycles_match_net_displacement() {
    let p = SwimmerParams::standard();
    let mut r = StdRng::seed_from_u64(11);
    for _ in 0..20 {
        let (a, b, eps) = draw(&mut r);
        let (th0, th1) = (a.min(b), a.max(b));
        let s = mintime::synthesize(th0, th1, eps).unwrap();
        let g = net_displacement(th0, th1, &p).unwrap();
        for w0 in [FluidRegime::Viscous, FluidRegime::Ideal] {
            let tr = simulate(&s.profile, &p, 0.0, th0, w0, H).unwrap();
            assert!((tr.displacement() - g).abs() < 1e-6, "{th0} {th1}: {} vs {g}", tr.displacement());
        }
    }
}

#[test]
fn closing_first_cycles_move_by_the_reflected_amount() {
    // The relay puts every closing leg in the viscous regime and every
    // opening leg in the ideal one, so the order of the legs does not
    // change the net motion.
    let p = SwimmerParams::standard();
    let mut r = StdRng::seed_from_u64(12);
    for _ in 0..20 {
        let (a, b, eps) = draw(&mut r);
        let (th0, th1) = (a.max(b), a.min(b));
        let s = mintime::synthesize(th0, th1, eps).unwrap();
        let g = net_displacement(th0, th1, &p).unwrap();
        let tr = simulate(&s.profile, &p, 0.0, th0, FluidRegime::Ideal, H).unwrap();
        assert!((tr.displacement() + g).abs() < 1e-6);
        assert!((tr.displacement() - net_displacement(th1, th0, &p).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn lq_cycles_follow_the_same_displacement() {
    let p = SwimmerParams::standard();
    for (th0, th1, b) in [(0.05, 0.5, 1.0), (0.6, 1.2, 0.5), (0.3, 0.9, 4.0)] {
        let s = lq::synthesize_lq(th0, th1, 0.1, 1.0, b).unwrap();
        let tr = simulate(&s.profile, &p, 0.0, th0, FluidRegime::Ideal, H).unwrap();
        let g = net_displacement(th0, th1, &p).unwrap();
        assert!((tr.displacement() - g).abs() < 1e-6, "{th0} {th1} {b}");
    }
}

#[test]
fn trajectory_regimes_follow_the_relay() {
    let p = SwimmerParams::standard();
    let mut r = StdRng::seed_from_u64(13);
    for _ in 0..20 {
        let (th0, th1, eps) = draw(&mut r);
        let s = mintime::approximate(th0, th1, eps, r.gen_range(-eps..eps), 40).unwrap();
        let w0 = if r.gen_bool(0.5) { FluidRegime::Viscous } else { FluidRegime::Ideal };
        let tr = simulate(&s.profile, &p, 0.0, th0, w0, H).unwrap();
        let sig = evolve(RelayState::new(w0, eps).unwrap(), &s.profile).unwrap();
        let events: Vec<(f64, FluidRegime)> = tr.switch_events.iter().map(|e| (e.t, e.w_new)).collect();
        assert_eq!(events, sig.switches);
        for smp in &tr.samples[..tr.samples.len() - 1] {
            assert_eq!(smp.w, sig.regime_at(smp.t), "t = {}", smp.t);
        }
    }
}
