//! Linear-quadratic cycle: minimise `int (A u^2 + B theta^2)` under `|u| <= eps`.
//!
//! The opening leg runs at `u = +eps`. The closing leg follows the saturated
//! feedback `u = -min(eps, lambda theta)` with `lambda = sqrt(B/A)`: bound
//! control down to `theta = eps / lambda`, then the exponential arc
//! `u = -p / (2A)`, `p = 2 A lambda theta`, which satisfies `p' = -2 B theta`.
//!
//! `t1`, `t2` and `t_f` report the closed-form case formulas. When the
//! closing leg enters the exponential arc its actual duration differs from
//! the formula `t2`; the realised values are kept in `realized_t2` and
//! `realized_t_f`.

use serde::{Deserialize, Serialize};

use crate::dynamics::check_angle;
use crate::error::{Error, Result};
use crate::mintime;
use crate::profiles::{self, ControlProfile, CostSpec, VALUE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LqCase {
    /// Both angles at or above `eps sqrt(A/B)`: bang-bang in both legs.
    FullySaturated,
    /// `theta_low < eps sqrt(A/B) < theta_high`: the closing leg ends on the
    /// exponential arc.
    SaturatedThenExponential,
}

/// Adjoint on an unsaturated arc, `p(t) = coeff * exp(rate (t - t_start))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjointArc {
    pub t_start: f64,
    pub t_end: f64,
    pub coeff: f64,
    pub rate: f64,
}

impl AdjointArc {
    pub fn eval(&self, t: f64) -> f64 {
        self.coeff * (self.rate * (t - self.t_start)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqSolution {
    pub theta0: f64,
    pub theta1: f64,
    pub eps: f64,
    pub u0: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub t1: f64,
    pub t2: f64,
    pub t_f: f64,
    pub realized_t2: f64,
    pub realized_t_f: f64,
    pub cost: f64,
    pub case_label: LqCase,
    pub adjoint: Vec<AdjointArc>,
    pub profile: ControlProfile,
}

impl LqSolution {
    /// `int (A u^2 + B theta^2)` of the stored profile.
    pub fn recompute_cost(&self) -> f64 {
        profiles::cost(&self.profile, self.theta0, &CostSpec { a: self.a, b: self.b, time_weight: 0.0 })
    }
}

fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive { what, value })
    }
}

/// Lower bound `(theta1 - theta0)^2 / t1` on `int u^2` over a leg of length `t1`.
pub fn jensen_bound(theta0: f64, theta1: f64, t1: f64) -> Result<f64> {
    check_positive("t1", t1)?;
    Ok((theta1 - theta0).powi(2) / t1)
}

pub fn synthesize_lq(theta0: f64, theta1: f64, eps: f64, a: f64, b: f64) -> Result<LqSolution> {
    check_angle(theta0)?;
    check_angle(theta1)?;
    check_positive("eps", eps)?;
    check_positive("A", a)?;
    check_positive("B", b)?;

    let lambda = (b / a).sqrt();
    let threshold = eps * (a / b).sqrt();
    let (lo, hi) = (theta0.min(theta1), theta0.max(theta1));

    if theta0 == theta1 {
        let profile = ControlProfile::empty(eps, 0.0)?;
        let case_label = if lo >= threshold {
            LqCase::FullySaturated
        } else {
            LqCase::SaturatedThenExponential
        };
        return Ok(LqSolution {
            theta0,
            theta1,
            eps,
            u0: 0.0,
            a,
            b,
            t1: 0.0,
            t2: 0.0,
            t_f: 0.0,
            realized_t2: 0.0,
            realized_t_f: 0.0,
            cost: 0.0,
            case_label,
            adjoint: Vec::new(),
            profile,
        });
    }
    if hi <= threshold {
        return Err(Error::UnhandledLqCase { theta1: hi, threshold });
    }

    let case_label = if lo >= threshold {
        LqCase::FullySaturated
    } else {
        LqCase::SaturatedThenExponential
    };
    let t_open = (hi - lo) / eps;
    let (t_close_formula, t_f_formula) = match case_label {
        LqCase::FullySaturated => ((hi - lo) / eps, 2.0 * (hi - lo) / eps),
        LqCase::SaturatedThenExponential => {
            let tail = (a / b).sqrt() * (hi / lo).ln();
            (tail, (hi - lo) / eps + tail)
        }
    };

    // Closing leg, realised: bound arc then exponential arc.
    let sat = (hi - lo.max(threshold)) / eps;
    let tail = if lo < threshold { (threshold / lo).ln() / lambda } else { 0.0 };
    let realized_close = sat + tail;

    let opening_first = theta1 > theta0;
    let mut builder = ControlProfile::builder(eps, 0.0);
    let mut adjoint = Vec::new();
    let push_close = |builder: profiles::ProfileBuilder, adjoint: &mut Vec<AdjointArc>| {
        let builder = builder.constant(sat, -eps);
        let start = builder.time();
        if tail > 0.0 {
            adjoint.push(AdjointArc {
                t_start: start,
                t_end: start + tail,
                coeff: 2.0 * a * eps,
                rate: -lambda,
            });
        }
        builder.exponential(tail, -eps, -lambda)
    };
    if opening_first {
        builder = builder.constant(t_open, eps).declare_switch();
        builder = push_close(builder, &mut adjoint);
    } else {
        builder = push_close(builder, &mut adjoint).declare_switch();
        builder = builder.constant(t_open, eps);
    }
    let profile = builder.build()?;

    let (t1, t2, realized_t2) = if opening_first {
        (t_open, t_close_formula, realized_close)
    } else {
        (t_close_formula, t_open, t_open)
    };
    let cost = profiles::cost(&profile, theta0, &CostSpec::quadratic(a, b)?);
    Ok(LqSolution {
        theta0,
        theta1,
        eps,
        u0: 0.0,
        a,
        b,
        t1,
        t2,
        t_f: t_f_formula,
        realized_t2,
        realized_t_f: profile.t_final(),
        cost,
        case_label,
        adjoint,
        profile,
    })
}

/// `B = 0`: the cost reduces to `A int u^2` and the minimum-time bang-bang
/// control is optimal (Jensen equality on each leg).
pub fn b_zero_synthesize(theta0: f64, theta1: f64, eps: f64, a: f64) -> Result<LqSolution> {
    check_positive("A", a)?;
    let s = mintime::synthesize(theta0, theta1, eps)?;
    let cost = profiles::cost(&s.profile, theta0, &CostSpec::quadratic(a, 0.0)?);
    Ok(LqSolution {
        theta0,
        theta1,
        eps,
        u0: s.u0,
        a,
        b: 0.0,
        t1: s.t1,
        t2: s.t2,
        t_f: s.t_f,
        realized_t2: s.t2,
        realized_t_f: s.t_f,
        cost,
        case_label: LqCase::FullySaturated,
        adjoint: Vec::new(),
        profile: s.profile,
    })
}

/// Continuous approximation of an LQ cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqApproximation {
    pub k: u32,
    pub u0: f64,
    pub t_fk: f64,
    pub cost: f64,
    pub profile: ControlProfile,
}

/// Replaces the jumps of `sol.profile` by ramps of length `1/k`: one from
/// `u0` at the start, one at the interior switch, one back to `u0` at the
/// end. Hold times and the exponential tail are re-solved so that the
/// angle still reaches `theta1` and returns to `theta0` exactly.
pub fn approximate_lq(sol: &LqSolution, u0: f64, k: u32) -> Result<LqApproximation> {
    let eps = sol.eps;
    if !u0.is_finite() || u0.abs() > eps + VALUE_TOL {
        return Err(Error::ConstraintViolation { u: u0, eps });
    }
    if k == 0 {
        return Err(Error::KTooSmall {
            k,
            reason: "k must be at least 1".into(),
        });
    }
    let too_small = |what: &str| Error::KTooSmall {
        k,
        reason: format!("ramps of length 1/k do not fit: {what}"),
    };
    let (theta0, theta1) = (sol.theta0, sol.theta1);
    if theta0 == theta1 {
        return Ok(LqApproximation {
            k,
            u0,
            t_fk: 0.0,
            cost: 0.0,
            profile: ControlProfile::empty(eps, u0)?,
        });
    }
    // With B = 0 the closing leg never leaves the bound.
    let lambda = if sol.b > 0.0 { (sol.b / sol.a).sqrt() } else { 0.0 };
    let threshold = if sol.b > 0.0 { eps / lambda } else { 0.0 };
    let r = 1.0 / f64::from(k);
    let feedback = |th: f64| if lambda > 0.0 { -(eps.min(lambda * th)) } else { -eps };

    let mut bld = ControlProfile::builder(eps, u0);
    if theta1 > theta0 {
        let (lo, hi) = (theta0, theta1);
        let after_ramp = lo + 0.5 * (u0 + eps) * r;
        let h1 = (hi - after_ramp) / eps;
        if h1 < 0.0 {
            return Err(too_small("opening ramp overshoots theta1"));
        }
        bld = bld.ramp(r, u0, eps).constant(h1, eps).ramp(r, eps, -eps);
        // End angle theta_e of the closing feedback such that the last ramp
        // from feedback(theta_e) to u0 lands on theta0.
        let at_threshold = threshold + 0.5 * (u0 - eps) * r;
        if threshold <= 0.0 || at_threshold <= lo {
            let theta_e = lo + 0.5 * (eps - u0) * r;
            if theta_e > hi {
                return Err(too_small("closing ramps overshoot theta0"));
            }
            bld = bld.constant((hi - theta_e) / eps, -eps).ramp(r, -eps, u0);
        } else {
            let denom = 1.0 - 0.5 * lambda * r;
            let theta_e = (lo - 0.5 * u0 * r) / denom;
            if denom <= 0.0 || !(theta_e > 0.0 && theta_e <= threshold) {
                return Err(too_small("exponential tail cannot absorb the final ramp"));
            }
            bld = bld
                .constant((hi - threshold) / eps, -eps)
                .exponential((threshold / theta_e).ln() / lambda, -eps, -lambda)
                .ramp(r, feedback(theta_e), u0);
        }
    } else {
        let (lo, hi) = (theta1, theta0);
        let start = hi + 0.5 * (u0 - eps) * r;
        if start < lo || (threshold > lo && start < threshold) {
            return Err(too_small("opening ramp overshoots the saturated arc"));
        }
        bld = bld.ramp(r, u0, -eps);
        let knee = if threshold > 0.0 { threshold.max(lo) } else { lo };
        if start > knee {
            bld = bld.constant((start - knee) / eps, -eps);
        }
        let tail_from = start.min(knee);
        if tail_from > lo {
            let c = feedback(tail_from);
            bld = bld.exponential((tail_from / lo).ln() / lambda, c, -lambda);
        }
        let u_lo = feedback(lo);
        let mid = lo + 0.5 * (u_lo + eps) * r;
        let theta_e = hi - 0.5 * (eps + u0) * r;
        if theta_e < mid {
            return Err(too_small("closing ramps overshoot theta0"));
        }
        bld = bld.ramp(r, u_lo, eps).constant((theta_e - mid) / eps, eps).ramp(r, eps, u0);
    }
    let profile = bld.build()?;
    let cost = profiles::cost(&profile, theta0, &CostSpec { a: sol.a, b: sol.b, time_weight: 0.0 });
    Ok(LqApproximation {
        k,
        u0,
        t_fk: profile.t_final(),
        cost,
        profile,
    })
}
