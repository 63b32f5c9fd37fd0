//! Minimum-time synthesis for one open/close cycle.
//!
//! With a single regime switch the problem splits into two legs,
//! `theta0 -> theta1` and `theta1 -> theta0`, each solved by a constant
//! control at the bound: `u = eps * sign(theta_to - theta_from)` with adjoint
//! `p0 = -u / eps^2` (so that `1 + p0 u = 0`). The relaxed optimum is
//! discontinuous at the switch; [`approximate`] builds the continuous
//! piecewise-linear family `u_k` converging to it in L1.

use serde::{Deserialize, Serialize};

use crate::dynamics::check_angle;
use crate::error::{Error, Result};
use crate::profiles::{self, ControlProfile, CostSpec};

/// Which leg comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinTimeCase {
    /// `theta1 < theta0`: close first (`u = -eps`), then reopen.
    ClosingFirst,
    /// `theta1 > theta0`: open first (`u = +eps`), then close.
    OpeningFirst,
    /// `theta1 == theta0`: nothing to do.
    Degenerate,
}

/// Case dispatch together with the constant adjoint of each leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseLabel {
    pub case: MinTimeCase,
    pub p0_first_leg: f64,
    pub p0_second_leg: f64,
}

impl CaseLabel {
    fn for_angles(theta0: f64, theta1: f64, eps: f64) -> Self {
        if theta1 < theta0 {
            CaseLabel {
                case: MinTimeCase::ClosingFirst,
                p0_first_leg: 1.0 / eps,
                p0_second_leg: -1.0 / eps,
            }
        } else if theta1 > theta0 {
            CaseLabel {
                case: MinTimeCase::OpeningFirst,
                p0_first_leg: -1.0 / eps,
                p0_second_leg: 1.0 / eps,
            }
        } else {
            CaseLabel {
                case: MinTimeCase::Degenerate,
                p0_first_leg: 0.0,
                p0_second_leg: 0.0,
            }
        }
    }
}

/// Synthesised cycle: profile, leg durations and cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalSolution {
    pub theta0: f64,
    pub theta1: f64,
    pub eps: f64,
    pub u0: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<u32>,
    pub t1: f64,
    pub t2: f64,
    pub t_f: f64,
    pub cost: f64,
    pub case_label: CaseLabel,
    pub profile: ControlProfile,
}

/// Pontryagin Hamiltonian of the minimum-time leg, `1 + p0 u`.
pub fn hamiltonian(p0: f64, u: f64) -> f64 {
    1.0 + p0 * u
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive { what: "eps", value: eps })
    }
}

/// Time-optimal constant control and duration for one leg.
pub fn solve_leg(theta_from: f64, theta_to: f64, eps: f64) -> Result<(f64, f64)> {
    check_eps(eps)?;
    if theta_to == theta_from {
        return Ok((0.0, 0.0));
    }
    let u = if theta_to > theta_from { eps } else { -eps };
    Ok((u, (theta_to - theta_from).abs() / eps))
}

/// Bang-bang minimum-time cycle `theta0 -> theta1 -> theta0`.
pub fn synthesize(theta0: f64, theta1: f64, eps: f64) -> Result<OptimalSolution> {
    check_angle(theta0)?;
    check_angle(theta1)?;
    check_eps(eps)?;
    let (u_a, t1) = solve_leg(theta0, theta1, eps)?;
    let (u_b, t2) = solve_leg(theta1, theta0, eps)?;
    let profile = if t1 == 0.0 {
        ControlProfile::empty(eps, 0.0)?
    } else {
        ControlProfile::builder(eps, 0.0)
            .constant(t1, u_a)
            .declare_switch()
            .constant(t2, u_b)
            .build()?
    };
    let t_f = t1 + t2;
    Ok(OptimalSolution {
        theta0,
        theta1,
        eps,
        u0: 0.0,
        k: None,
        t1,
        t2,
        t_f,
        cost: profiles::cost(&profile, theta0, &CostSpec::min_time()),
        case_label: CaseLabel::for_angles(theta0, theta1, eps),
        profile,
    })
}

/// Continuous approximation `u_k` of the bang-bang cycle with
/// `u(0) = u(t_fk) = u0`.
///
/// Written for `theta1 < theta0` (the other case is the mirror image
/// `u -> -u`, `u0 -> -u0`):
///
/// * ramp `u0 -> -eps` on `[0, 1/k]`, hold `-eps` until `t1k`, where
///   `t1k = (u0 + eps + 2k(theta0 - theta1)) / (2k eps)` and `theta(t1k) = theta1`;
/// * ramp `-eps -> +eps` over `tau`, hold `+eps`, ramp `+eps -> u0` over
///   `tau`, with `tau = 2 eps / (k (3 eps - u0))`. The closing part lasts
///   exactly `t2k = (eps + k(theta0 - theta1)) / (k eps)` and lands on
///   `theta0`, so `t_fk = (u0 + 3 eps + 4k(theta0 - theta1)) / (2k eps)`.
pub fn approximate(theta0: f64, theta1: f64, eps: f64, u0: f64, k: u32) -> Result<OptimalSolution> {
    check_angle(theta0)?;
    check_angle(theta1)?;
    check_eps(eps)?;
    if !u0.is_finite() || u0.abs() > eps + profiles::VALUE_TOL {
        return Err(Error::ConstraintViolation { u: u0, eps });
    }
    if k == 0 {
        return Err(Error::KTooSmall {
            k,
            reason: "k must be at least 1".into(),
        });
    }
    let case_label = CaseLabel::for_angles(theta0, theta1, eps);
    if theta0 == theta1 {
        let profile = ControlProfile::empty(eps, u0)?;
        return Ok(OptimalSolution {
            theta0,
            theta1,
            eps,
            u0,
            k: Some(k),
            t1: 0.0,
            t2: 0.0,
            t_f: 0.0,
            cost: 0.0,
            case_label,
            profile,
        });
    }
    // sigma maps the opening-first case onto the closing-first one.
    let sigma = if theta1 < theta0 { 1.0 } else { -1.0 };
    let v0 = sigma * u0;
    let dist = (theta0 - theta1).abs();
    let kf = f64::from(k);

    let t1k = (v0 + eps + 2.0 * kf * dist) / (2.0 * kf * eps);
    let t2k = (eps + kf * dist) / (kf * eps);
    let t_fk = (v0 + 3.0 * eps + 4.0 * kf * dist) / (2.0 * kf * eps);

    let ramp = 1.0 / kf;
    let tau = 2.0 * eps / (kf * (3.0 * eps - v0));
    let hold1 = t1k - ramp;
    let hold2 = t2k - 2.0 * tau;
    if hold1 < 0.0 {
        return Err(Error::KTooSmall {
            k,
            reason: format!("the opening ramp overshoots theta1 (t1k = {t1k} < 1/k)"),
        });
    }
    if hold2 < 0.0 {
        return Err(Error::KTooSmall {
            k,
            reason: format!("the closing ramps overshoot theta0 (t2k = {t2k} < 2 tau = {})", 2.0 * tau),
        });
    }
    let s = |v: f64| sigma * v;
    let profile = ControlProfile::builder(eps, u0)
        .ramp(ramp, s(v0), s(-eps))
        .constant(hold1, s(-eps))
        .ramp(tau, s(-eps), s(eps))
        .constant(hold2, s(eps))
        .ramp(tau, s(eps), s(v0))
        .build()?;
    Ok(OptimalSolution {
        theta0,
        theta1,
        eps,
        u0,
        k: Some(k),
        t1: t1k,
        t2: t2k,
        t_f: t_fk,
        cost: profiles::cost(&profile, theta0, &CostSpec::min_time()),
        case_label,
        profile,
    })
}

/// One row of a convergence study of `u_k` towards the bang-bang control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub k: u32,
    pub t_fk: f64,
    /// `t_fk - t_f`
    pub t_f_gap: f64,
    /// `int |u_k - u|` with constant continuation past the shorter horizon
    pub l1_gap: f64,
    /// `max |theta_k - theta|` over a 10^4-point grid
    pub sup_theta_gap: f64,
}

pub fn write_convergence_csv<W: std::io::Write>(rows: &[ConvergenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Grid size used for the sup-norm of the angle gap.
pub const SUP_GRID: usize = 10_000;

pub fn convergence_report(theta0: f64, theta1: f64, eps: f64, u0: f64, k_list: &[u32]) -> Result<Vec<ConvergenceRow>> {
    let exact = synthesize(theta0, theta1, eps)?;
    k_list
        .iter()
        .map(|&k| {
            let approx = approximate(theta0, theta1, eps, u0, k)?;
            Ok(ConvergenceRow {
                k,
                t_fk: approx.t_f,
                t_f_gap: approx.t_f - exact.t_f,
                l1_gap: profiles::l1_distance(&approx.profile, &exact.profile),
                sup_theta_gap: profiles::sup_theta_gap(&approx.profile, &exact.profile, theta0, SUP_GRID),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::integrate_theta;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};

    #[test]
    fn leg_examples() {
        let (u, t) = solve_leg(FRAC_PI_3, FRAC_PI_6, 0.1).unwrap();
        assert_eq!(u, -0.1);
        assert!((t - 5.235_987_755_982_988).abs() < 1e-12);
        let (u, t) = solve_leg(FRAC_PI_6, FRAC_PI_3, 0.1).unwrap();
        assert_eq!(u, 0.1);
        assert!((t - 5.235_987_755_982_988).abs() < 1e-12);
        assert_eq!(solve_leg(0.4, 0.4, 0.3).unwrap(), (0.0, 0.0));
        assert!(solve_leg(0.4, 0.5, 0.0).is_err());
        assert!(solve_leg(0.4, 0.5, -1.0).is_err());
    }

    #[test]
    fn synthesize_examples() {
        let s = synthesize(FRAC_PI_6, FRAC_PI_3, 0.1).unwrap();
        assert!((s.t_f - 10.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        assert_eq!(s.t_f, s.t1 + s.t2);
        assert_eq!(s.profile.t_final(), s.t_f);
        assert_eq!(s.cost, s.t_f);
        assert_eq!(s.profile.declared_switches(), &[s.t1]);
        assert_eq!(s.case_label.case, MinTimeCase::OpeningFirst);

        let d = synthesize(0.5, 0.5, 0.1).unwrap();
        assert_eq!(d.t_f, 0.0);
        assert_eq!(d.case_label.case, MinTimeCase::Degenerate);

        let twice = synthesize(FRAC_PI_6, FRAC_PI_3, 0.2).unwrap();
        assert!((twice.t_f - s.t_f / 2.0).abs() < 1e-12);
        assert!(synthesize(0.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn hamiltonian_vanishes_on_each_leg() {
        for (a, b) in [(0.3, 1.1), (1.1, 0.3)] {
            let s = synthesize(a, b, 0.07).unwrap();
            let u1 = s.profile.eval_u(0.0).unwrap();
            let u2 = s.profile.eval_u(s.t_f).unwrap();
            assert!(hamiltonian(s.case_label.p0_first_leg, u1).abs() < 1e-15);
            assert!(hamiltonian(s.case_label.p0_second_leg, u2).abs() < 1e-15);
        }
    }

    #[test]
    fn approximate_example_values() {
        let s = approximate(FRAC_PI_3, FRAC_PI_6, 0.1, 0.0, 100).unwrap();
        assert!((s.t_f - 10.486_975_511_965_977).abs() < 1e-12);
        assert!((s.profile.t_final() - s.t_f).abs() < 1e-12);
        let exact = synthesize(FRAC_PI_3, FRAC_PI_6, 0.1).unwrap();
        // gap (u0 + 3 eps) / (2 k eps) = 1.5 / k
        assert!((s.t_f - exact.t_f - 1.5 / 100.0).abs() < 1e-12);
        assert_eq!(s.profile.eval_u(0.0).unwrap(), 0.0);
        assert!(s.profile.eval_u(s.profile.t_final()).unwrap().abs() < 1e-12);
        assert!((s.profile.eval_u(0.01).unwrap() + 0.1).abs() < 1e-15);
    }

    #[test]
    fn approximate_lands_on_both_angles() {
        for (th0, th1, u0) in [(1.0, 0.4, 0.03), (0.4, 1.0, 0.03), (0.4, 1.0, -0.1), (1.0, 0.4, 0.1)] {
            let s = approximate(th0, th1, 0.1, u0, 40).unwrap();
            let path = integrate_theta(&s.profile, th0);
            assert!((path.eval(s.t1) - th1).abs() < 1e-12, "{th0} {th1} {u0}");
            assert!((path.final_value() - th0).abs() < 1e-12);
            assert!(s.profile.max_abs() <= 0.1 + 1e-12);
            assert!((s.profile.t_final() - s.t_f).abs() < 1e-12);
        }
    }

    #[test]
    fn approximate_rejects_bad_inputs() {
        assert!(matches!(
            approximate(1.0, 0.5, 0.1, 0.2, 10),
            Err(Error::ConstraintViolation { .. })
        ));
        assert!(matches!(approximate(1.0, 0.999, 0.1, 0.0, 1), Err(Error::KTooSmall { .. })));
        assert!(approximate(1.0, 0.5, 0.1, 0.0, 0).is_err());
    }

    #[test]
    fn convergence_rows_shrink() {
        let rows = convergence_report(FRAC_PI_3, FRAC_PI_6, 0.1, 0.02, &[10, 20, 40]).unwrap();
        for w in rows.windows(2) {
            assert!((w[0].l1_gap / w[1].l1_gap - 2.0).abs() < 1e-9);
            assert!(w[1].sup_theta_gap <= w[0].sup_theta_gap);
        }
        for r in &rows {
            assert!(r.sup_theta_gap <= r.l1_gap + 1e-12);
            assert!(r.l1_gap > 0.0);
        }
    }
}
