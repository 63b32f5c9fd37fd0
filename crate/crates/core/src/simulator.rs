//! Forward simulation of `x' = V_w(theta) u`, `theta' = u`, `w = h_eps[u]`.
//!
//! All discontinuities (segment junctions, declared switches, relay
//! crossings) are known in closed form, so the integrator is plain RK4 with a
//! uniform step inside each event-free interval and a restart at every event.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::{check_angle, FluidRegime, SwimmerParams, THETA_MAX, THETA_MIN};
use crate::error::{Error, Result};
use crate::hysteresis::{evolve, RegimeSignal, RelayState};
use crate::profiles::{ControlProfile, Segment};

pub const DEFAULT_STEP: f64 = 1e-4;
/// Target upper bound on the number of stored samples.
const MAX_SAMPLES: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub h: f64,
    /// Hold the regime fixed instead of running the relay.
    pub frozen_regime: Option<FluidRegime>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            h: DEFAULT_STEP,
            frozen_regime: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub theta: f64,
    pub u: f64,
    pub w: FluidRegime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub t: f64,
    pub w_old: FluidRegime,
    pub w_new: FluidRegime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub switch_events: Vec<SwitchEvent>,
    pub final_state: Sample,
    pub x0: f64,
    pub eps: f64,
}

impl Trajectory {
    pub fn displacement(&self) -> f64 {
        self.final_state.x - self.x0
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.samples {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_events_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(["t", "w_old", "w_new"])?;
        for e in &self.switch_events {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn simulate(
    profile: &ControlProfile,
    p: &SwimmerParams,
    x0: f64,
    theta0: f64,
    w0: FluidRegime,
    h: f64,
) -> Result<Trajectory> {
    simulate_with(profile, p, x0, theta0, w0, SimOptions { h, ..SimOptions::default() })
}

pub fn simulate_with(
    profile: &ControlProfile,
    p: &SwimmerParams,
    x0: f64,
    theta0: f64,
    w0: FluidRegime,
    opts: SimOptions,
) -> Result<Trajectory> {
    if !(opts.h.is_finite() && opts.h > 0.0) {
        return Err(Error::NonPositive { what: "h", value: opts.h });
    }
    p.validate()?;
    check_angle(theta0)?;
    let signal = match opts.frozen_regime {
        Some(w) => RegimeSignal::constant(w),
        None => evolve(RelayState::new(w0, profile.eps())?, profile)?,
    };
    let switch_events: Vec<SwitchEvent> = {
        let mut prev = signal.initial;
        signal
            .switches
            .iter()
            .map(|&(t, w)| {
                let e = SwitchEvent { t, w_old: prev, w_new: w };
                prev = w;
                e
            })
            .collect()
    };

    let t_final = profile.t_final();
    if profile.segments().is_empty() {
        let s = Sample {
            t: 0.0,
            x: x0,
            theta: theta0,
            u: profile.u0(),
            w: signal.final_regime(),
        };
        return Ok(Trajectory {
            samples: vec![s],
            switch_events,
            final_state: s,
            x0,
            eps: profile.eps(),
        });
    }

    let stride = ((t_final / opts.h) / MAX_SAMPLES).ceil().max(1.0) as u64;
    let mut samples = Vec::new();
    let (mut x, mut theta) = (x0, theta0);
    let mut step_count: u64 = 0;

    for seg in profile.segments() {
        let mut cuts: Vec<f64> = signal
            .switch_times()
            .into_iter()
            .filter(|&t| t > seg.t_start && t < seg.t_end)
            .collect();
        cuts.insert(0, seg.t_start);
        cuts.push(seg.t_end);
        cuts.dedup();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let regime = signal.regime_at(a);
            samples.push(Sample {
                t: a,
                x,
                theta,
                u: seg.value(a),
                w: regime,
            });
            let n = ((b - a) / opts.h).ceil().max(1.0) as u64;
            let dt = (b - a) / n as f64;
            for i in 0..n {
                let t = a + dt * i as f64;
                (x, theta) = rk4_step(seg, p, regime, t, dt, x, theta);
                let t_next = if i + 1 == n { b } else { a + dt * (i + 1) as f64 };
                if !(THETA_MIN..=THETA_MAX).contains(&theta) || !x.is_finite() {
                    return Err(Error::DomainExit { t: t_next, theta });
                }
                step_count += 1;
                if i + 1 < n && step_count.is_multiple_of(stride) {
                    samples.push(Sample {
                        t: t_next,
                        x,
                        theta,
                        u: seg.value(t_next),
                        w: regime,
                    });
                }
            }
        }
    }
    let last = profile.segments().last().expect("non-empty profile");
    let final_state = Sample {
        t: t_final,
        x,
        theta,
        u: last.end_value(),
        w: signal.final_regime(),
    };
    samples.push(final_state);
    Ok(Trajectory {
        samples,
        switch_events,
        final_state,
        x0,
        eps: profile.eps(),
    })
}

fn rk4_step(seg: &Segment, p: &SwimmerParams, w: FluidRegime, t: f64, dt: f64, x: f64, theta: f64) -> (f64, f64) {
    let f = |t: f64, th: f64| {
        let u = seg.value(t);
        (p.factor(w, th) * u, u)
    };
    let half = 0.5 * dt;
    let (k1x, k1t) = f(t, theta);
    let (k2x, k2t) = f(t + half, theta + half * k1t);
    let (k3x, k3t) = f(t + half, theta + half * k2t);
    let (k4x, k4t) = f(t + dt, theta + dt * k3t);
    (
        x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        theta + dt / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub achieved_dx: f64,
    pub expected_dx: f64,
    pub error: f64,
    pub tol: f64,
    pub pass: bool,
    /// `max(0, max |u| - eps)` over the stored samples
    pub max_constraint_violation: f64,
    pub switch_count: usize,
}

pub fn verify(traj: &Trajectory, expected_dx: f64, tol: f64) -> VerifyReport {
    let achieved_dx = traj.displacement();
    let error = (achieved_dx - expected_dx).abs();
    let max_u = traj.samples.iter().map(|s| s.u.abs()).fold(0.0, f64::max);
    VerifyReport {
        achieved_dx,
        expected_dx,
        error,
        tol,
        pass: error <= tol,
        max_constraint_violation: (max_u - traj.eps).max(0.0),
        switch_count: traj.switch_events.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::primitive;
    use crate::mintime;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};

    #[test]
    fn zero_control_is_an_equilibrium() {
        let p = SwimmerParams::standard();
        let prof = ControlProfile::builder(0.1, 0.0).constant(5.0, 0.0).build().unwrap();
        let tr = simulate(&prof, &p, 1.5, 0.7, FluidRegime::Ideal, 0.01).unwrap();
        assert!(tr.samples.iter().all(|s| s.x == 1.5 && s.theta == 0.7 && s.w == FluidRegime::Ideal));
        assert!(verify(&tr, 0.0, 1e-12).pass);
    }

    #[test]
    fn single_ideal_leg_matches_primitive() {
        let p = SwimmerParams::standard();
        let (eps, t) = (0.1, 5.0);
        let prof = ControlProfile::builder(eps, eps).constant(t, eps).build().unwrap();
        let h = 0.05;
        let tr = simulate(&prof, &p, 0.0, FRAC_PI_6, FluidRegime::Ideal, h).unwrap();
        let exact = primitive(FluidRegime::Ideal, FRAC_PI_6 + eps * t, FRAC_PI_6, &p).unwrap();
        assert!((tr.displacement() - exact).abs() <= 5.0 * h.powi(4) * t);
        assert!(tr.switch_events.is_empty());
    }

    #[test]
    fn bang_bang_cycle_matches_net_displacement() {
        let p = SwimmerParams::standard();
        let s = mintime::synthesize(FRAC_PI_6, FRAC_PI_3, 0.1).unwrap();
        let tr = simulate(&s.profile, &p, 0.0, FRAC_PI_6, FluidRegime::Viscous, 1e-3).unwrap();
        let expected = crate::dynamics::net_displacement(FRAC_PI_6, FRAC_PI_3, &p).unwrap();
        assert!(verify(&tr, expected, 1e-6).pass);
        let wrong = verify(&tr, expected + 1.0, 1e-6);
        assert!(!wrong.pass && (wrong.error - 1.0).abs() < 1e-6);
        assert_eq!(tr.switch_events.len(), 2);
        assert!(tr.samples.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn frozen_regime_has_no_net_motion() {
        let p = SwimmerParams::standard();
        let s = mintime::synthesize(FRAC_PI_6, FRAC_PI_3, 0.1).unwrap();
        for w in [FluidRegime::Viscous, FluidRegime::Ideal] {
            let opts = SimOptions {
                h: 1e-3,
                frozen_regime: Some(w),
            };
            let tr = simulate_with(&s.profile, &p, 0.0, FRAC_PI_6, w, opts).unwrap();
            assert!(tr.displacement().abs() <= 1e-9);
        }
    }

    #[test]
    fn leaving_the_domain_is_an_error() {
        let p = SwimmerParams::standard();
        let prof = ControlProfile::builder(0.1, 0.1).constant(20.0, 0.1).build().unwrap();
        assert!(matches!(
            simulate(&prof, &p, 0.0, 1.2, FluidRegime::Ideal, 0.01),
            Err(Error::DomainExit { .. })
        ));
        assert!(simulate(&prof, &p, 0.0, 0.2, FluidRegime::Ideal, 0.0).is_err());
    }

    #[test]
    fn csv_headers() {
        let p = SwimmerParams::standard();
        let s = mintime::synthesize(FRAC_PI_6, FRAC_PI_3, 0.1).unwrap();
        let tr = simulate(&s.profile, &p, 0.0, FRAC_PI_6, FluidRegime::Viscous, 0.01).unwrap();
        let mut a = Vec::new();
        tr.write_csv(&mut a).unwrap();
        assert!(String::from_utf8(a).unwrap().starts_with("t,x,theta,u,w\n"));
        let mut b = Vec::new();
        tr.write_events_csv(&mut b).unwrap();
        let ev = String::from_utf8(b).unwrap();
        assert!(ev.starts_with("t,w_old,w_new\n"));
        assert_eq!(ev.lines().count(), 3);
    }
}
