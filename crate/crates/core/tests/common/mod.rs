#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use scallop_core::dynamics::{FluidRegime, SwimmerParams};
use scallop_core::hysteresis::{evolve, evolve_segments, RegimeSignal, RelayState};
use scallop_core::profiles::{ControlProfile, SegmentKind, VALUE_TOL};

/// Antiderivatives of the two velocity factors in closed form, valid for
/// `xi < eta` and `m11 > m22`.
pub fn viscous_antiderivative(theta: f64, p: &SwimmerParams) -> f64 {
    let q = p.eta - p.xi;
    -p.a * p.eta / (p.eta * q).sqrt() * (theta.cos() * (q / p.eta).sqrt()).atanh()
}

pub fn ideal_antiderivative(theta: f64, p: &SwimmerParams) -> f64 {
    let big_p = p.m + p.m22;
    let big_q = p.m11 - p.m22;
    -p.a * big_p / (big_p * big_q).sqrt() * (theta.cos() * (big_q / big_p).sqrt()).atan()
}

pub fn exact_leg(regime: FluidRegime, from: f64, to: f64, p: &SwimmerParams) -> f64 {
    match regime {
        FluidRegime::Viscous => viscous_antiderivative(to, p) - viscous_antiderivative(from, p),
        FluidRegime::Ideal => ideal_antiderivative(to, p) - ideal_antiderivative(from, p),
    }
}

fn pick_value(rng: &mut StdRng, eps: f64) -> f64 {
    match rng.gen_range(0..10) {
        0 | 1 => eps,
        2 | 3 => -eps,
        _ => rng.gen_range(-eps..=eps),
    }
}

/// Random piecewise control with 2..=8 segments of all three kinds. Every
/// junction is declared, so jumps are allowed anywhere.
pub fn random_profile(rng: &mut StdRng, eps: f64) -> ControlProfile {
    let n = rng.gen_range(2..=8);
    let mut b = ControlProfile::builder(eps, 0.0);
    let mut prev_end = 0.0;
    for i in 0..n {
        let d = rng.gen_range(0.05..2.0);
        let start = if i > 0 && rng.gen_bool(0.5) { prev_end } else { pick_value(rng, eps) };
        let kind = match rng.gen_range(0..3) {
            0 => SegmentKind::Constant { value: start },
            1 => {
                let end = pick_value(rng, eps);
                SegmentKind::Linear { slope: (end - start) / d, intercept: start }
            }
            _ => {
                let s = if start == 0.0 { 0.5 * eps } else { start };
                let mag = rng.gen_range(0.01 * eps..=eps);
                let end = mag * s.signum();
                SegmentKind::Exponential { coeff: s, rate: (end / s).ln() / d }
            }
        };
        b = b.push(d, kind);
        prev_end = match kind {
            SegmentKind::Constant { value } => value,
            SegmentKind::Linear { slope, intercept } => intercept + slope * d,
            SegmentKind::Exponential { coeff, rate } => coeff * (rate * d).exp(),
        };
        if i + 1 < n {
            b = b.declare_switch();
        }
    }
    b.build().expect("generated profile is valid")
}

pub fn random_regime(rng: &mut StdRng) -> FluidRegime {
    if rng.gen_bool(0.5) {
        FluidRegime::Viscous
    } else {
        FluidRegime::Ideal
    }
}

/// Switch times strictly increase and each switch flips the regime.
pub fn check_alternation(sig: &RegimeSignal) -> Result<(), String> {
    let mut prev = sig.initial;
    let mut last_t = f64::NEG_INFINITY;
    for &(t, w) in &sig.switches {
        if w == prev {
            return Err(format!("switch at {t} does not change the regime"));
        }
        if t <= last_t {
            return Err(format!("switch times not increasing at {t}"));
        }
        prev = w;
        last_t = t;
    }
    Ok(())
}

/// At most one switch in `[t_start, t_end)` of every (monotone) segment.
/// Crossings computed within rounding of `t_end` count as being at `t_end`.
pub fn check_monotone_segments(profile: &ControlProfile, sig: &RegimeSignal) -> Result<(), String> {
    for seg in profile.segments() {
        let n = sig
            .switches
            .iter()
            .filter(|(t, _)| {
                let tol = 1e-12 * seg.t_end.abs().max(1.0);
                *t >= seg.t_start - tol && *t < seg.t_end - tol
            })
            .count();
        if n > 1 {
            return Err(format!("{n} switches in [{}, {}): {:?} {:?}", seg.t_start, seg.t_end, sig, seg));
        }
    }
    Ok(())
}

/// Each switch happens where the control sits on the threshold that
/// triggers it (left or right value at a junction).
pub fn check_thresholds(profile: &ControlProfile, sig: &RegimeSignal) -> Result<(), String> {
    let eps = profile.eps();
    for &(t, w) in &sig.switches {
        let mut vals = vec![profile.eval_u(t).unwrap()];
        for s in profile.segments() {
            if s.t_end == t {
                vals.push(s.end_value());
            }
        }
        let ok = vals.iter().any(|&v| match w {
            FluidRegime::Ideal => v >= eps - VALUE_TOL,
            FluidRegime::Viscous => v <= -eps + VALUE_TOL,
        });
        if !ok {
            return Err(format!("switch to {w} at {t} with u in {vals:?}"));
        }
    }
    Ok(())
}

/// Same regimes, switch times equal up to rounding of restricted segments.
fn same_switches(a: &[(f64, FluidRegime)], b: &[(f64, FluidRegime)]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.1 == y.1 && (x.0 - y.0).abs() <= 1e-12 * x.0.abs().max(1.0))
}

/// The signal up to `s` depends only on the control up to `s`.
pub fn check_causality(profile: &ControlProfile, w0: FluidRegime, s: f64) -> Result<(), String> {
    let relay = RelayState::new(w0, profile.eps()).unwrap();
    let full = evolve(relay, profile).map_err(|e| e.to_string())?;
    let (head, _) = evolve_segments(relay, &profile.segments_between(0.0, s)).map_err(|e| e.to_string())?;
    if full.initial != head.initial || !same_switches(&full.truncated(s).switches, &head.switches) {
        return Err(format!("prefix at s = {s} differs: {:?} vs {:?}", full.truncated(s), head));
    }
    Ok(())
}

/// Running on `[0, s]` then from the resulting state on `[s, T]` equals one run.
pub fn check_semigroup(profile: &ControlProfile, w0: FluidRegime, s: f64) -> Result<(), String> {
    let relay = RelayState::new(w0, profile.eps()).unwrap();
    let full = evolve(relay, profile).map_err(|e| e.to_string())?;
    let (head, mid) = evolve_segments(relay, &profile.segments_between(0.0, s)).map_err(|e| e.to_string())?;
    let (tail, _) =
        evolve_segments(mid, &profile.segments_between(s, profile.t_final())).map_err(|e| e.to_string())?;
    let mut joined = head.switches.clone();
    joined.extend(tail.switches);
    if tail.initial != head.final_regime() || !same_switches(&joined, &full.switches) {
        return Err(format!("split at s = {s} differs: {:?} + {:?} vs {:?}; profile {:?}", head, joined, full, profile.segments()));
    }
    Ok(())
}

/// All relay checks on one random profile; returns the first failure.
pub fn relay_suite(rng: &mut StdRng) -> Result<(), String> {
    let eps = rng.gen_range(0.01..1.0);
    let profile = random_profile(rng, eps);
    let w0 = random_regime(rng);
    let sig = evolve(RelayState::new(w0, eps).unwrap(), &profile).map_err(|e| e.to_string())?;
    check_alternation(&sig)?;
    check_monotone_segments(&profile, &sig)?;
    check_thresholds(&profile, &sig)?;
    let s = rng.gen_range(0.0..profile.t_final());
    check_causality(&profile, w0, s)?;
    check_semigroup(&profile, w0, s)?;
    Ok(())
}
