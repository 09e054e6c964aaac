//! Branch -1 of the Lambert W function on [-1/e, 0), used for the
//! dominant pole of the M/D/1 waiting-time transform.

use crate::error::WfError;

/// Solves `w e^w = x` for `w <= -1`.
///
/// Bracketed bisection seeded on [-50, -1] (extended downward when the
/// argument is very close to 0), followed by a Newton polish; the residual
/// contract is `|w e^w - x| <= 1e-12 |x|`.
pub fn lambert_w_minus1(x: f64) -> Result<f64, WfError> {
    let inv_e = -(-1.0f64).exp();
    if !(x >= inv_e && x < 0.0) {
        return Err(WfError::Domain(format!(
            "lambert_w_minus1 requires -1/e <= x < 0, got {x}"
        )));
    }
    if x == inv_e {
        return Ok(-1.0);
    }
    let g = |w: f64| w * w.exp() - x;
    let mut lo = -50.0f64;
    while g(lo) < 0.0 {
        lo *= 2.0;
        if lo < -1e4 {
            return Err(WfError::Domain(format!("lambert_w_minus1 bracket failed at x={x}")));
        }
    }
    let mut hi = -1.0f64;
    debug_assert!(g(hi) <= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < 1e-13 * hi.abs() {
            break;
        }
    }
    let mut w = 0.5 * (lo + hi);
    let mut best = (w, (w * w.exp() - x).abs());
    for _ in 0..8 {
        let ew = w.exp();
        let f = w * ew - x;
        let df = (1.0 + w) * ew;
        if df == 0.0 {
            break;
        }
        let step = f / df;
        w = (w - step).min(-1.0);
        let resid = (w * w.exp() - x).abs();
        if resid < best.1 {
            best = (w, resid);
        }
        if step.abs() < 1e-16 * w.abs() {
            break;
        }
    }
    let w = best.0;
    let resid = best.1;
    if resid > 1e-12 * x.abs() {
        return Err(WfError::Domain(format!(
            "lambert_w_minus1 residual {resid:.3e} exceeds tolerance at x={x}"
        )));
    }
    Ok(w)
}
