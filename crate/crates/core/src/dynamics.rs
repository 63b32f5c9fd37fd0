//! Regime-dependent translational dynamics of the scallop.
//!
//! The juncture point moves according to `x' = V_w(theta) * theta'`, where
//! `V_1` comes from resistive force theory (viscous regime) and `V_2` from the
//! added-mass Lagrangian of two thin ellipses (ideal regime). Everything here
//! is a pure function of the angle and the [`SwimmerParams`].

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, ABS_TOL, MAX_DEPTH};

/// Guard kept between admissible angles and the endpoints `0`, `pi/2`.
pub const DOMAIN_GUARD: f64 = 1e-9;

/// Slack allowed when evaluating the velocity factors at the closed endpoints.
const VELOCITY_SLACK: f64 = 1e-12;

/// Smallest admissible angle.
pub const THETA_MIN: f64 = DOMAIN_GUARD;
/// Largest admissible angle.
pub const THETA_MAX: f64 = FRAC_PI_2 - DOMAIN_GUARD;

/// Geometry, drag and added-mass coefficients of the swimmer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwimmerParams {
    /// Valve major semiaxis.
    pub a: f64,
    /// Valve minor semiaxis.
    pub b: f64,
    /// Drag coefficient parallel to a valve.
    pub xi: f64,
    /// Drag coefficient perpendicular to a valve.
    pub eta: f64,
    /// Valve mass.
    pub m: f64,
    /// Added mass along the valve axis.
    pub m11: f64,
    /// Added mass across the valve axis.
    pub m22: f64,
}

impl SwimmerParams {
    pub fn new(a: f64, b: f64, xi: f64, eta: f64, m: f64, m11: f64, m22: f64) -> Result<Self> {
        let p = SwimmerParams { a, b, xi, eta, m, m11, m22 };
        p.validate()?;
        Ok(p)
    }

    /// Parameter set used for the n-switching experiment: `a = 10`, `b = 0.1`,
    /// `xi = 1`, `eta = 2`, `m = 1`, `m11 = a*pi`, `m22 = b*pi`.
    pub fn standard() -> Self {
        SwimmerParams {
            a: 10.0,
            b: 0.1,
            xi: 1.0,
            eta: 2.0,
            m: 1.0,
            m11: 10.0 * PI,
            m22: 0.1 * PI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.xi, self.eta, self.m, self.m11, self.m22];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all coefficients must be finite".into()));
        }
        if !(self.a > 0.0 && self.b > 0.0 && self.b < self.a) {
            return Err(Error::InvalidParams(format!(
                "need 0 < b < a, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        if !(self.xi > 0.0 && self.eta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "drag coefficients must be positive, got xi = {}, eta = {}",
                self.xi, self.eta
            )));
        }
        if !(self.m > 0.0 && self.m11 >= 0.0 && self.m22 >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "need m > 0, m11 >= 0, m22 >= 0, got m = {}, m11 = {}, m22 = {}",
                self.m, self.m11, self.m22
            )));
        }
        Ok(())
    }

    /// Velocity factor of `regime` at `theta`, without the domain check.
    #[inline]
    pub(crate) fn factor(&self, regime: FluidRegime, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        match regime {
            FluidRegime::Viscous => self.a * self.eta * s / (self.xi * c * c + self.eta * s * s),
            FluidRegime::Ideal => {
                2.0 * self.a * s * (self.m + self.m22)
                    / (2.0 * (self.m + self.m11 * c * c + self.m22 * s * s))
            }
        }
    }
}

impl Default for SwimmerParams {
    fn default() -> Self {
        Self::standard()
    }
}

/// Parses a flat `key = value` (or `key: value`) file with keys
/// `a, b, xi, eta, m, m11, m22`. Missing `m11`/`m22` default to `a*pi`/`b*pi`.
impl FromStr for SwimmerParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut vals: [Option<f64>; 7] = [None; 7];
        const KEYS: [&str; 7] = ["a", "b", "xi", "eta", "m", "m11", "m22"];
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let idx = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::Parse(format!("line {}: unknown key `{key}`", lineno + 1)))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: `{}` is not a decimal", lineno + 1, value.trim())))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("line {}: value must be finite", lineno + 1)));
            }
            if vals[idx].replace(v).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        let need = |i: usize| vals[i].ok_or_else(|| Error::Parse(format!("missing key `{}`", KEYS[i])));
        let a = need(0)?;
        let b = need(1)?;
        let m11 = vals[5].unwrap_or(a * PI);
        let m22 = vals[6].unwrap_or(b * PI);
        SwimmerParams::new(a, b, need(2)?, need(3)?, need(4)?, m11, m22)
    }
}

/// Fluid regime selected by the relay: `1` viscous, `2` ideal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum FluidRegime {
    Viscous = 1,
    Ideal = 2,
}

impl FluidRegime {
    pub fn other(self) -> Self {
        match self {
            FluidRegime::Viscous => FluidRegime::Ideal,
            FluidRegime::Ideal => FluidRegime::Viscous,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

impl From<FluidRegime> for u8 {
    fn from(w: FluidRegime) -> u8 {
        w as u8
    }
}

impl TryFrom<u8> for FluidRegime {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(FluidRegime::Viscous),
            2 => Ok(FluidRegime::Ideal),
            other => Err(Error::Parse(format!("fluid regime must be 1 or 2, got {other}"))),
        }
    }
}

impl fmt::Display for FluidRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

fn check_velocity_domain(theta: f64) -> Result<()> {
    if theta.is_finite() && (-VELOCITY_SLACK..=FRAC_PI_2 + VELOCITY_SLACK).contains(&theta) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "theta",
            value: theta,
            lo: 0.0,
            hi: FRAC_PI_2,
        })
    }
}

/// Checks `theta` against the guarded domain `[DOMAIN_GUARD, pi/2 - DOMAIN_GUARD]`.
pub fn check_angle(theta: f64) -> Result<()> {
    if theta.is_finite() && (THETA_MIN..=THETA_MAX).contains(&theta) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "theta",
            value: theta,
            lo: THETA_MIN,
            hi: THETA_MAX,
        })
    }
}

/// `V_1(theta) = a eta sin(theta) / (xi cos^2 theta + eta sin^2 theta)`.
pub fn v_viscous(theta: f64, p: &SwimmerParams) -> Result<f64> {
    check_velocity_domain(theta)?;
    Ok(p.factor(FluidRegime::Viscous, theta))
}

/// `V_2(theta) = 2 a sin(theta) (m + m22) / (2 (m + m11 cos^2 theta + m22 sin^2 theta))`.
pub fn v_ideal(theta: f64, p: &SwimmerParams) -> Result<f64> {
    check_velocity_domain(theta)?;
    Ok(p.factor(FluidRegime::Ideal, theta))
}

pub fn velocity(regime: FluidRegime, theta: f64, p: &SwimmerParams) -> Result<f64> {
    check_velocity_domain(theta)?;
    Ok(p.factor(regime, theta))
}

/// `F_w(theta) - F_w(theta_ref)`, the integral of `V_w` from `theta_ref` to `theta`.
pub fn primitive(regime: FluidRegime, theta: f64, theta_ref: f64, p: &SwimmerParams) -> Result<f64> {
    check_angle(theta)?;
    check_angle(theta_ref)?;
    adaptive_simpson(|s| p.factor(regime, s), theta_ref, theta, ABS_TOL, MAX_DEPTH)
}

/// Displacement of one cycle `theta0 -> theta1 -> theta0` whose opening leg
/// runs in the ideal regime and whose closing leg runs in the viscous regime.
pub fn net_displacement(theta0: f64, theta1: f64, p: &SwimmerParams) -> Result<f64> {
    let ideal = primitive(FluidRegime::Ideal, theta1, theta0, p)?;
    let viscous = primitive(FluidRegime::Viscous, theta1, theta0, p)?;
    Ok(ideal - viscous)
}
