//! Switching-angle inversion and the n-cycle sweep.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{check_angle, net_displacement, SwimmerParams, THETA_MAX, THETA_MIN};
use crate::error::{Error, Result};
use crate::lq;
use crate::mintime;
use crate::profiles::{self, ControlProfile, CostSpec};

const GRID: usize = 200;
const MAX_BISECTIONS: usize = 200;

/// Inverse of `theta1 -> net_displacement(theta0, theta1)` for a fixed `theta0`.
#[derive(Debug, Clone)]
pub struct Planner {
    theta0: f64,
    params: SwimmerParams,
    at_min: f64,
    at_max: f64,
}

impl Planner {
    /// Checks on a grid that the displacement map is strictly monotone.
    pub fn new(theta0: f64, params: SwimmerParams) -> Result<Self> {
        check_angle(theta0)?;
        params.validate()?;
        let values = (0..=GRID)
            .map(|i| {
                let th = THETA_MIN + (THETA_MAX - THETA_MIN) * i as f64 / GRID as f64;
                net_displacement(theta0, th, &params).map(|g| (th, g))
            })
            .collect::<Result<Vec<_>>>()?;
        let increasing = values[GRID].1 > values[0].1;
        for w in values.windows(2) {
            let ok = if increasing { w[1].1 > w[0].1 } else { w[1].1 < w[0].1 };
            if !ok {
                return Err(Error::NonMonotone { at: w[1].0 });
            }
        }
        Ok(Planner {
            theta0,
            params,
            at_min: values[0].1,
            at_max: values[GRID].1,
        })
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// Attainable displacements `(lo, hi)` over the guarded angle range.
    pub fn attainable(&self) -> (f64, f64) {
        (self.at_min.min(self.at_max), self.at_min.max(self.at_max))
    }

    pub fn solve(&self, dx_target: f64) -> Result<f64> {
        if dx_target == 0.0 {
            return Ok(self.theta0);
        }
        let (lo, hi) = self.attainable();
        if !(dx_target >= lo && dx_target <= hi) {
            return Err(Error::Unattainable { target: dx_target, lo, hi });
        }
        let f = |th: f64| net_displacement(self.theta0, th, &self.params).map(|g| g - dx_target);
        // Bracket on the side of theta0 where the target lies.
        let (mut a, mut b) = if (dx_target > 0.0) == (self.at_max > 0.0) {
            (self.theta0, THETA_MAX)
        } else {
            (THETA_MIN, self.theta0)
        };
        let mut fa = f(a)?;
        for _ in 0..MAX_BISECTIONS {
            let m = 0.5 * (a + b);
            if m <= a || m >= b || b - a < 1e-14 {
                break;
            }
            let fm = f(m)?;
            if fm == 0.0 {
                return Ok(m);
            }
            if (fm > 0.0) == (fa > 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        let theta1 = 0.5 * (a + b);
        let residual = f(theta1)?;
        if residual.abs() > 1e-9 * dx_target.abs().max(1.0) {
            return Err(Error::NonMonotone { at: theta1 });
        }
        Ok(theta1)
    }
}

pub fn solve_switch_angle(dx_target: f64, theta0: f64, p: &SwimmerParams) -> Result<f64> {
    Planner::new(theta0, *p)?.solve(dx_target)
}

/// One row of the sweep over the number of cycles `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u32,
    pub theta1: f64,
    pub per_cycle_time: f64,
    /// `int (A u^2 + B theta^2)` over one cycle
    pub per_cycle_energy: f64,
    pub total_time: f64,
    /// `n * per-cycle running cost + n`
    #[serde(rename = "J_n")]
    pub j_n: f64,
}

/// Cycle profile for the given cost: bang-bang when `B = 0`, the LQ
/// synthesis otherwise.
pub fn cycle_profile(theta0: f64, theta1: f64, eps: f64, spec: &CostSpec) -> Result<ControlProfile> {
    if spec.b == 0.0 {
        Ok(mintime::synthesize(theta0, theta1, eps)?.profile)
    } else {
        Ok(lq::synthesize_lq(theta0, theta1, eps, spec.a, spec.b)?.profile)
    }
}

/// Splits `dx_total` into `n` equal cycles for `n = 1..=n_max`.
pub fn sweep(
    dx_total: f64,
    theta0: f64,
    p: &SwimmerParams,
    eps: f64,
    spec: &CostSpec,
    n_max: u32,
) -> Result<Vec<SweepRow>> {
    if n_max == 0 {
        return Err(Error::InvalidParams("n_max must be at least 1".into()));
    }
    let planner = Planner::new(theta0, *p)?;
    let energy_spec = CostSpec {
        time_weight: 0.0,
        ..*spec
    };
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let nf = f64::from(n);
            let theta1 = planner.solve(dx_total / nf)?;
            let profile = cycle_profile(theta0, theta1, eps, spec)?;
            let per_cycle_time = profile.t_final();
            let running = profiles::cost(&profile, theta0, spec);
            Ok(SweepRow {
                n,
                theta1,
                per_cycle_time,
                per_cycle_energy: profiles::cost(&profile, theta0, &energy_spec),
                total_time: nf * per_cycle_time,
                j_n: nf * running + nf,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
