//! Adaptive Simpson quadrature with an absolute error target.

use crate::error::{Error, Result};

/// Absolute tolerance used for the swimmer primitives.
pub const ABS_TOL: f64 = 1e-10;
/// Maximum recursion depth before giving up.
pub const MAX_DEPTH: u32 = 40;
/// Levels always subdivided, so that a lucky agreement of the coarse
/// estimates cannot stop the refinement early.
const MIN_LEVELS: u32 = 4;

/// Integrates `f` over `[a, b]` (either orientation) to absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol, max_depth).map(|v| -v);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, max_depth, MIN_LEVELS).ok_or(Error::QuadratureNonConvergence { a, b })
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    forced: u32,
) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if forced == 0 && delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let forced = forced.saturating_sub(1);
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, forced)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, forced)?;
    Some(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12, 10).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
    }

    #[test]
    fn orientation_flips_sign() {
        let a = adaptive_simpson(f64::sin, 0.2, 1.3, 1e-11, 40).unwrap();
        let b = adaptive_simpson(f64::sin, 1.3, 0.2, 1e-11, 40).unwrap();
        assert_eq!(a, -b);
        assert!((a - (0.2f64.cos() - 1.3f64.cos())).abs() < 1e-11);
    }

    #[test]
    fn depth_exhaustion_is_reported() {
        let r = adaptive_simpson(|x| (1.0 / x).sin(), 1e-6, 1.0, 1e-14, 3);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }
}
