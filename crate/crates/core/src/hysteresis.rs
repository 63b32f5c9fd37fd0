//! Delayed thermostatic relay `h_eps`.
//!
//! The relay holds its regime until the control attains the opposite
//! threshold: ideal (2) switches to viscous (1) once `u <= -eps`, viscous
//! switches to ideal once `u >= +eps`. Comparisons are closed, so a control
//! sitting exactly on a threshold fires the switch.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::FluidRegime;
use crate::error::{Error, Result};
use crate::profiles::{ControlProfile, Segment, SegmentKind, VALUE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayState {
    w: FluidRegime,
    eps: f64,
}

impl RelayState {
    pub fn new(w: FluidRegime, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::NonPositive { what: "eps", value: eps });
        }
        Ok(RelayState { w, eps })
    }

    pub fn w(&self) -> FluidRegime {
        self.w
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Applies one control value.
    pub fn step(self, u: f64) -> Result<RelayState> {
        if !u.is_finite() || u.abs() > self.eps + VALUE_TOL {
            return Err(Error::ConstraintViolation { u, eps: self.eps });
        }
        let w = match self.w {
            FluidRegime::Ideal if u <= -self.eps + VALUE_TOL => FluidRegime::Viscous,
            FluidRegime::Viscous if u >= self.eps - VALUE_TOL => FluidRegime::Ideal,
            w => w,
        };
        Ok(RelayState { w, ..self })
    }

    /// Threshold that makes the relay leave its current regime, and whether
    /// it is approached from below.
    fn trigger(&self) -> (f64, bool) {
        match self.w {
            FluidRegime::Ideal => (-self.eps, false),
            FluidRegime::Viscous => (self.eps, true),
        }
    }
}

/// Piecewise-constant regime `w(t)`: an initial regime and its switch instants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSignal {
    pub initial: FluidRegime,
    pub switches: Vec<(f64, FluidRegime)>,
}

impl RegimeSignal {
    pub fn constant(w: FluidRegime) -> Self {
        RegimeSignal {
            initial: w,
            switches: Vec::new(),
        }
    }

    /// Regime in force at `t` (switches at `t` included).
    pub fn regime_at(&self, t: f64) -> FluidRegime {
        let n = self.switches.partition_point(|(ts, _)| *ts <= t);
        if n == 0 {
            self.initial
        } else {
            self.switches[n - 1].1
        }
    }

    pub fn final_regime(&self) -> FluidRegime {
        self.switches.last().map_or(self.initial, |(_, w)| *w)
    }

    pub fn switch_times(&self) -> Vec<f64> {
        self.switches.iter().map(|(t, _)| *t).collect()
    }

    /// Restriction to `[0, s]`.
    pub fn truncated(&self, s: f64) -> RegimeSignal {
        RegimeSignal {
            initial: self.initial,
            switches: self.switches.iter().copied().filter(|(t, _)| *t <= s).collect(),
        }
    }

    fn push(&mut self, t: f64, w: FluidRegime) {
        // two switches at one instant cancel
        if let Some(&(last, _)) = self.switches.last() {
            if last == t {
                self.switches.pop();
                return;
            }
        }
        self.switches.push((t, w));
    }

    /// Writes `# w0=<initial>` followed by a `t_switch,w_new` table.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "# w0={}", self.initial)?;
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["t_switch", "w_new"])?;
        for (t, w) in &self.switches {
            wtr.write_record([t.to_string(), w.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let meta = lines.next().ok_or_else(|| Error::Parse("empty regime csv".into()))?;
        let w0: u8 = meta
            .trim()
            .strip_prefix("# w0=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad metadata row `{meta}`")))?;
        let rest: String = lines.collect::<Vec<_>>().join("\n");
        let mut rdr = csv::Reader::from_reader(rest.as_bytes());
        let mut switches = Vec::new();
        for rec in rdr.deserialize::<(f64, u8)>() {
            let (t, w) = rec?;
            switches.push((t, FluidRegime::try_from(w)?));
        }
        Ok(RegimeSignal {
            initial: FluidRegime::try_from(w0)?,
            switches,
        })
    }
}

/// Runs the relay over a whole profile, starting from `initial` at `t = 0`.
pub fn evolve(initial: RelayState, profile: &ControlProfile) -> Result<RegimeSignal> {
    if profile.segments().is_empty() {
        let state = initial.step(profile.u0())?;
        let mut signal = RegimeSignal::constant(initial.w);
        if state.w != initial.w {
            signal.push(0.0, state.w);
        }
        return Ok(signal);
    }
    evolve_segments(initial, profile.segments()).map(|(signal, _)| signal)
}

/// Runs the relay over contiguous segments; returns the regime signal and the
/// relay state at the end of the last segment.
///
/// Crossing instants are located in closed form on each segment, and the
/// value at each segment start is applied first so that a jump landing on a
/// threshold fires at the jump instant.
pub fn evolve_segments(initial: RelayState, segments: &[Segment]) -> Result<(RegimeSignal, RelayState)> {
    let mut state = initial;
    let mut signal = RegimeSignal::constant(initial.w);
    for seg in segments {
        let (lo, hi) = seg.range();
        for v in [lo, hi] {
            if v.abs() > state.eps + VALUE_TOL {
                return Err(Error::ConstraintViolation { u: v, eps: state.eps });
            }
        }
        let mut t = seg.t_start;
        loop {
            let (level, above) = state.trigger();
            match seg.first_attainment(level, t, above) {
                Some(ts) => {
                    state.w = state.w.other();
                    signal.push(ts, state.w);
                    t = ts;
                }
                None => break,
            }
        }
    }
    Ok((signal, state))
}

/// Sampled-control mode: linear interpolation between samples.
pub fn evolve_sampled(initial: RelayState, times: &[f64], values: &[f64]) -> Result<RegimeSignal> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::InvalidProfile(
            "sampled control needs equally many (>= 1) times and values".into(),
        ));
    }
    if times.len() == 1 {
        let state = initial.step(values[0])?;
        let mut signal = RegimeSignal::constant(initial.w);
        if state.w != initial.w {
            signal.push(times[0], state.w);
        }
        return Ok(signal);
    }
    let mut segments = Vec::with_capacity(times.len() - 1);
    for i in 0..times.len() - 1 {
        let dt = times[i + 1] - times[i];
        let slope = (values[i + 1] - values[i]) / dt;
        segments.push(Segment::new(
            times[i],
            times[i + 1],
            SegmentKind::Linear {
                slope,
                intercept: values[i],
            },
        )?);
    }
    evolve_segments(initial, &segments).map(|(signal, _)| signal)
}
