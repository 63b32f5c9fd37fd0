//! Two-link scallop swimmer whose surrounding fluid switches between a
//! viscous and an ideal regime through a delayed relay on the opening rate.
//!
//! * [`dynamics`]: velocity factors, their primitives and the per-cycle net
//!   displacement.
//! * [`profiles`]: piecewise-analytic controls with exact integrals.
//! * [`hysteresis`]: the relay and the regime signal it produces.
//! * [`mintime`], [`lq`]: closed-form optimal cycles and their continuous
//!   approximations.
//! * [`planner`]: switching angle for a target displacement, n-cycle sweep.
//! * [`simulator`]: RK4 integration of the hybrid system with exact events.

mod analytic;
pub mod dynamics;
pub mod error;
pub mod hysteresis;
pub mod lq;
pub mod mintime;
pub mod planner;
pub mod profiles;
pub mod quadrature;
pub mod simulator;

pub use dynamics::{FluidRegime, SwimmerParams};
pub use error::{Error, Result};
pub use profiles::{ControlProfile, CostSpec};
