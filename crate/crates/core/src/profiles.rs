//! Piecewise-analytic controls.
//!
//! A [`ControlProfile`] is an ordered tiling of `[0, t_final]` by constant,
//! linear and exponential [`Segment`]s. The angle `theta' = u`, running costs
//! and L1 distances are all evaluated in closed form per segment.

use serde::{Deserialize, Serialize};

use crate::analytic::Piece;
use crate::error::{Error, Result};

/// Tolerance on `|u| <= eps` and on value agreement at continuous junctions.
pub const VALUE_TOL: f64 = 1e-12;
/// Relative tolerance used when snapping segment end points together.
const TIME_TOL: f64 = 1e-12;

/// Formula of one segment; `tau = t - t_start` is the local time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum SegmentKind {
    /// `u = value`
    Constant { value: f64 },
    /// `u = intercept + slope * tau`
    Linear { slope: f64, intercept: f64 },
    /// `u = coeff * exp(rate * tau)`
    Exponential { coeff: f64, rate: f64 },
}

impl SegmentKind {
    fn is_finite(&self) -> bool {
        match *self {
            SegmentKind::Constant { value } => value.is_finite(),
            SegmentKind::Linear { slope, intercept } => slope.is_finite() && intercept.is_finite(),
            SegmentKind::Exponential { coeff, rate } => coeff.is_finite() && rate.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(rename = "t0")]
    pub t_start: f64,
    #[serde(rename = "t1")]
    pub t_end: f64,
    #[serde(flatten)]
    pub kind: SegmentKind,
}

impl Segment {
    pub fn new(t_start: f64, t_end: f64, kind: SegmentKind) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(Error::InvalidProfile(format!(
                "segment needs t_start < t_end, got [{t_start}, {t_end}]"
            )));
        }
        if !kind.is_finite() {
            return Err(Error::InvalidProfile("segment parameters must be finite".into()));
        }
        Ok(Segment { t_start, t_end, kind })
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Value at absolute time `t` (not range checked).
    pub fn value(&self, t: f64) -> f64 {
        let tau = t - self.t_start;
        match self.kind {
            SegmentKind::Constant { value } => value,
            SegmentKind::Linear { slope, intercept } => intercept + slope * tau,
            SegmentKind::Exponential { coeff, rate } => coeff * (rate * tau).exp(),
        }
    }

    pub fn start_value(&self) -> f64 {
        self.value(self.t_start)
    }

    pub fn end_value(&self) -> f64 {
        self.value(self.t_end)
    }

    /// Every segment kind is monotone, so the extremes sit at the end points.
    pub fn range(&self) -> (f64, f64) {
        let (a, b) = (self.start_value(), self.end_value());
        (a.min(b), a.max(b))
    }

    /// `int_{t_start}^{t} u`.
    pub fn integral_to(&self, t: f64) -> f64 {
        self.u_piece().integral(t - self.t_start)
    }

    /// The same formula restricted to `[a, b]` (absolute times inside the segment).
    pub fn restrict(&self, a: f64, b: f64) -> Segment {
        let shift = a - self.t_start;
        let kind = match self.kind {
            SegmentKind::Constant { value } => SegmentKind::Constant { value },
            SegmentKind::Linear { slope, intercept } => SegmentKind::Linear {
                slope,
                intercept: intercept + slope * shift,
            },
            SegmentKind::Exponential { coeff, rate } => SegmentKind::Exponential {
                coeff: coeff * (rate * shift).exp(),
                rate,
            },
        };
        Segment { t_start: a, t_end: b, kind }
    }

    pub(crate) fn u_piece(&self) -> Piece {
        match self.kind {
            SegmentKind::Constant { value } => Piece::poly(&[value]),
            SegmentKind::Linear { slope, intercept } => Piece::poly(&[intercept, slope]),
            SegmentKind::Exponential { coeff, rate } => Piece::exp(coeff, rate),
        }
    }

    pub(crate) fn theta_piece(&self, theta_start: f64) -> Piece {
        self.u_piece().antiderivative(theta_start)
    }

    /// First time in `[t_start, t_end]` at which `u` attains `level` (to
    /// [`VALUE_TOL`]), moving forward from `from`.
    pub fn first_attainment(&self, level: f64, from: f64, above: bool) -> Option<f64> {
        let reached = |v: f64| if above { v >= level - VALUE_TOL } else { v <= level + VALUE_TOL };
        let v0 = self.value(from);
        if reached(v0) {
            return Some(from);
        }
        let v1 = self.end_value();
        if !reached(v1) {
            return None;
        }
        let t = match self.kind {
            SegmentKind::Constant { .. } => self.t_end,
            SegmentKind::Linear { slope, intercept } => self.t_start + (level - intercept) / slope,
            SegmentKind::Exponential { coeff, rate } => {
                let ratio = level / coeff;
                if ratio > 0.0 {
                    self.t_start + ratio.ln() / rate
                } else {
                    self.t_end
                }
            }
        };
        if !t.is_finite() || (self.t_end - t).abs() <= TIME_TOL * self.t_end.abs().max(1.0) {
            return Some(self.t_end);
        }
        Some(t.clamp(from, self.t_end))
    }
}

/// A piecewise-analytic control on `[0, t_final]`.
///
/// Junctions listed in `declared_switches` may be discontinuous (relaxed,
/// bang-bang controls); every other junction must be continuous. A profile
/// with no declared switches is continuous and must satisfy
/// `u(0) = u(t_final) = u0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRecord")]
pub struct ControlProfile {
    eps: f64,
    u0: f64,
    segments: Vec<Segment>,
    declared_switches: Vec<f64>,
}

#[derive(Deserialize)]
struct ProfileRecord {
    eps: f64,
    u0: f64,
    segments: Vec<Segment>,
    #[serde(default)]
    declared_switches: Vec<f64>,
}

impl TryFrom<ProfileRecord> for ControlProfile {
    type Error = Error;

    fn try_from(r: ProfileRecord) -> Result<Self> {
        ControlProfile::new(r.eps, r.u0, r.segments, r.declared_switches)
    }
}

impl ControlProfile {
    pub fn new(eps: f64, u0: f64, mut segments: Vec<Segment>, declared_switches: Vec<f64>) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::NonPositive { what: "eps", value: eps });
        }
        if !u0.is_finite() || u0.abs() > eps + VALUE_TOL {
            return Err(Error::ConstraintViolation { u: u0, eps });
        }
        for s in &segments {
            Segment::new(s.t_start, s.t_end, s.kind)?;
        }
        if let Some(first) = segments.first() {
            if first.t_start.abs() > TIME_TOL {
                return Err(Error::InvalidProfile(format!(
                    "profile must start at t = 0, first segment starts at {}",
                    first.t_start
                )));
            }
            segments[0].t_start = 0.0;
        }
        for i in 1..segments.len() {
            let prev_end = segments[i - 1].t_end;
            let gap = segments[i].t_start - prev_end;
            if gap.abs() > TIME_TOL * prev_end.abs().max(1.0) {
                return Err(Error::InvalidProfile(format!(
                    "segments {} and {} leave a gap or overlap of {gap}",
                    i - 1,
                    i
                )));
            }
            segments[i].t_start = prev_end;
            if segments[i].t_start >= segments[i].t_end {
                return Err(Error::InvalidProfile(format!("segment {i} is empty after snapping")));
            }
        }
        for s in &segments {
            let (lo, hi) = s.range();
            for v in [lo, hi] {
                if v.abs() > eps + VALUE_TOL {
                    return Err(Error::ConstraintViolation { u: v, eps });
                }
            }
        }
        let mut switches = declared_switches;
        for w in switches.windows(2) {
            if w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less) {
                return Err(Error::InvalidProfile("declared switches must be strictly increasing".into()));
            }
        }
        for sw in switches.iter_mut() {
            let junction = segments
                .iter()
                .skip(1)
                .map(|s| s.t_start)
                .find(|t| (t - *sw).abs() <= TIME_TOL * t.abs().max(1.0));
            match junction {
                Some(t) => *sw = t,
                None => {
                    return Err(Error::InvalidProfile(format!(
                        "declared switch at t = {sw} is not a segment junction"
                    )))
                }
            }
        }
        for w in segments.windows(2) {
            let t = w[1].t_start;
            if switches.contains(&t) {
                continue;
            }
            let jump = (w[0].end_value() - w[1].start_value()).abs();
            if jump > VALUE_TOL {
                return Err(Error::InvalidProfile(format!(
                    "undeclared discontinuity of size {jump} at t = {t}"
                )));
            }
        }
        if switches.is_empty() {
            if let (Some(first), Some(last)) = (segments.first(), segments.last()) {
                let (a, b) = (first.start_value(), last.end_value());
                if (a - u0).abs() > VALUE_TOL || (b - u0).abs() > VALUE_TOL {
                    return Err(Error::InvalidProfile(format!(
                        "continuous profile must satisfy u(0) = u(t_final) = u0 = {u0}, got {a} and {b}"
                    )));
                }
            }
        }
        Ok(ControlProfile {
            eps,
            u0,
            segments,
            declared_switches: switches,
        })
    }

    /// Profile of zero duration.
    pub fn empty(eps: f64, u0: f64) -> Result<Self> {
        Self::new(eps, u0, Vec::new(), Vec::new())
    }

    pub fn builder(eps: f64, u0: f64) -> ProfileBuilder {
        ProfileBuilder {
            eps,
            u0,
            t: 0.0,
            segments: Vec::new(),
            switches: Vec::new(),
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn declared_switches(&self) -> &[f64] {
        &self.declared_switches
    }

    pub fn is_continuous(&self) -> bool {
        self.declared_switches.is_empty()
    }

    pub fn t_final(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    pub fn end_value(&self) -> f64 {
        self.segments.last().map_or(self.u0, Segment::end_value)
    }

    /// Value of the control at `t`; interior junctions take the right segment.
    pub fn eval_u(&self, t: f64) -> Result<f64> {
        let t_final = self.t_final();
        if !(0.0..=t_final).contains(&t) {
            return Err(Error::TimeOutOfRange { t, t_final });
        }
        Ok(self.segment_at(t).map_or(self.u0, |s| s.value(t)))
    }

    fn segment_at(&self, t: f64) -> Option<&Segment> {
        if self.segments.is_empty() {
            return None;
        }
        let idx = self.segments.partition_point(|s| s.t_end <= t);
        Some(&self.segments[idx.min(self.segments.len() - 1)])
    }

    /// Extends the profile by constant continuation of its final value.
    pub fn extended_to(&self, horizon: f64) -> ControlProfile {
        let t_final = self.t_final();
        if horizon <= t_final {
            return self.clone();
        }
        let mut segments = self.segments.clone();
        segments.push(Segment {
            t_start: t_final,
            t_end: horizon,
            kind: SegmentKind::Constant { value: self.end_value() },
        });
        ControlProfile {
            eps: self.eps,
            u0: self.u0,
            segments,
            declared_switches: self.declared_switches.clone(),
        }
    }

    /// Segments restricted to `[a, b]`, split where needed.
    pub fn segments_between(&self, a: f64, b: f64) -> Vec<Segment> {
        self.segments
            .iter()
            .filter(|s| s.t_end > a && s.t_start < b)
            .map(|s| s.restrict(s.t_start.max(a), s.t_end.min(b)))
            .filter(|s| s.t_end > s.t_start)
            .collect()
    }

    /// Largest `|u|` over the profile.
    pub fn max_abs(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                let (lo, hi) = s.range();
                lo.abs().max(hi.abs())
            })
            .fold(self.u0.abs(), f64::max)
    }
}

/// Appends segments back to back, starting from `t = 0`.
#[derive(Debug, Clone)]
pub struct ProfileBuilder {
    eps: f64,
    u0: f64,
    t: f64,
    segments: Vec<Segment>,
    switches: Vec<f64>,
}

impl ProfileBuilder {
    /// Appends a segment of the given duration; zero durations are skipped.
    pub fn push(mut self, duration: f64, kind: SegmentKind) -> Self {
        if duration > 0.0 {
            let end = self.t + duration;
            self.segments.push(Segment {
                t_start: self.t,
                t_end: end,
                kind,
            });
            self.t = end;
        }
        self
    }

    pub fn constant(self, duration: f64, value: f64) -> Self {
        self.push(duration, SegmentKind::Constant { value })
    }

    /// Linear ramp from `from` to `to` over `duration`.
    pub fn ramp(self, duration: f64, from: f64, to: f64) -> Self {
        if duration <= 0.0 {
            return self;
        }
        let slope = (to - from) / duration;
        self.push(duration, SegmentKind::Linear { slope, intercept: from })
    }

    pub fn exponential(self, duration: f64, coeff: f64, rate: f64) -> Self {
        self.push(duration, SegmentKind::Exponential { coeff, rate })
    }

    /// Marks the current time as a declared (discontinuous) regime switch.
    pub fn declare_switch(mut self) -> Self {
        if self.t > 0.0 && self.switches.last() != Some(&self.t) {
            self.switches.push(self.t);
        }
        self
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn build(self) -> Result<ControlProfile> {
        ControlProfile::new(self.eps, self.u0, self.segments, self.switches)
    }
}

/// Weights of the running cost `A u^2 + B theta^2 + time_weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub time_weight: f64,
}

impl CostSpec {
    pub fn new(a: f64, b: f64, time_weight: f64) -> Result<Self> {
        for (what, v) in [("A", a), ("B", b), ("time_weight", time_weight)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain {
                    what,
                    value: v,
                    lo: 0.0,
                    hi: f64::INFINITY,
                });
            }
        }
        if a == 0.0 && b == 0.0 && time_weight == 0.0 {
            return Err(Error::InvalidParams("cost weights must not all be zero".into()));
        }
        Ok(CostSpec { a, b, time_weight })
    }

    pub fn min_time() -> Self {
        CostSpec {
            a: 0.0,
            b: 0.0,
            time_weight: 1.0,
        }
    }

    pub fn quadratic(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, 0.0)
    }
}

/// Closed-form angle trajectory produced by [`integrate_theta`].
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPath {
    theta0: f64,
    pieces: Vec<(Segment, f64)>,
    end_value: f64,
    end_slope: f64,
}

impl ThetaPath {
    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn t_final(&self) -> f64 {
        self.pieces.last().map_or(0.0, |(s, _)| s.t_end)
    }

    /// `theta(t)`; beyond `t_final` the final control value is held constant.
    pub fn eval(&self, t: f64) -> f64 {
        let t_final = self.t_final();
        if t >= t_final {
            return self.end_value + self.end_slope * (t - t_final);
        }
        if t <= 0.0 {
            return self.theta0;
        }
        let idx = self.pieces.partition_point(|(s, _)| s.t_end <= t);
        let (seg, th) = &self.pieces[idx];
        th + seg.integral_to(t)
    }

    pub fn final_value(&self) -> f64 {
        self.end_value
    }

    /// Angle at the start of every segment, followed by the final angle.
    pub fn knots(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.pieces.iter().map(|(s, th)| (s.t_start, *th)).collect();
        out.push((self.t_final(), self.end_value));
        out
    }
}

/// Exact per-segment antiderivative of the control, anchored at `theta0`.
pub fn integrate_theta(profile: &ControlProfile, theta0: f64) -> ThetaPath {
    let mut th = theta0;
    let mut pieces = Vec::with_capacity(profile.segments.len());
    for seg in &profile.segments {
        pieces.push((*seg, th));
        th += seg.integral_to(seg.t_end);
    }
    ThetaPath {
        theta0,
        pieces,
        end_value: th,
        end_slope: profile.end_value(),
    }
}

/// `int_0^T (A u^2 + B theta^2) dt + time_weight * T`, in closed form.
pub fn cost(profile: &ControlProfile, theta0: f64, spec: &CostSpec) -> f64 {
    let mut total = spec.time_weight * profile.t_final();
    let mut th = theta0;
    for seg in &profile.segments {
        let d = seg.duration();
        let u = seg.u_piece();
        if spec.a != 0.0 {
            total += spec.a * u.square().integral(d);
        }
        if spec.b != 0.0 {
            total += spec.b * seg.theta_piece(th).square().integral(d);
        }
        th += u.integral(d);
    }
    total
}

/// `int |u1 - u2|` over the common horizon, both profiles extended by
/// constant continuation.
pub fn l1_distance(p1: &ControlProfile, p2: &ControlProfile) -> f64 {
    let horizon = p1.t_final().max(p2.t_final());
    if horizon == 0.0 {
        return 0.0;
    }
    let e1 = extended_segments(p1, horizon);
    let e2 = extended_segments(p2, horizon);
    let mut knots: Vec<f64> = e1
        .iter()
        .chain(e2.iter())
        .flat_map(|s| [s.t_start, s.t_end])
        .collect();
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup();
    let mut total = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        while e1[i].t_end <= mid {
            i += 1;
        }
        while e2[j].t_end <= mid {
            j += 1;
        }
        let a = e1[i].u_piece().shifted(lo - e1[i].t_start);
        let b = e2[j].u_piece().shifted(lo - e2[j].t_start);
        total += a.sub(&b).abs_integral(hi - lo);
    }
    total
}

fn extended_segments(p: &ControlProfile, horizon: f64) -> Vec<Segment> {
    if p.segments.is_empty() {
        return vec![Segment {
            t_start: 0.0,
            t_end: horizon,
            kind: SegmentKind::Constant { value: p.u0 },
        }];
    }
    p.extended_to(horizon).segments
}

/// `max |theta_1(t) - theta_2(t)|` over `n` equally spaced points of the
/// common horizon (end points included).
pub fn sup_theta_gap(p1: &ControlProfile, p2: &ControlProfile, theta0: f64, n: usize) -> f64 {
    let horizon = p1.t_final().max(p2.t_final());
    let a = integrate_theta(p1, theta0);
    let b = integrate_theta(p2, theta0);
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let t = horizon * i as f64 / (n - 1) as f64;
            (a.eval(t) - b.eval(t)).abs()
        })
        .fold(0.0, f64::max)
}
