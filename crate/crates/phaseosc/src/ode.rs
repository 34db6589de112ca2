//! Adaptive Dormand-Prince 5(4) integration for scalar ODEs.
//!
//! Used by the vanishing-noise density solver, where the equation is stiff in
//! a narrow layer next to each zero of the coupling. An explicit pair with
//! error control handles that by shrinking steps inside the layer; the layer
//! is thin enough that the total step count stays modest.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// 5th-order solution weights.
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference against the embedded 4th-order solution.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate y' = rhs(x, y) from (x0, y0), landing exactly on each target in
/// `targets`. Targets must march monotonically away from x0 (increasing or
/// decreasing); the integration direction follows them. Returns y at each
/// target.
pub fn integrate_to_targets(
    rhs: impl Fn(f64, f64) -> f64,
    x0: f64,
    y0: f64,
    targets: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(targets.len());
    let mut x = x0;
    let mut y = y0;
    let mut h_prev: Option<f64> = None;
    for &target in targets {
        let (ynew, hlast) = integrate_segment(&rhs, x, y, target, rtol, atol, h_prev)?;
        x = target;
        y = ynew;
        h_prev = Some(hlast);
        out.push(y);
    }
    Ok(out)
}

fn integrate_segment(
    rhs: &impl Fn(f64, f64) -> f64,
    x0: f64,
    y0: f64,
    xend: f64,
    rtol: f64,
    atol: f64,
    h_start: Option<f64>,
) -> Result<(f64, f64)> {
    let span = xend - x0;
    if span == 0.0 {
        return Ok((y0, h_start.unwrap_or(0.0)));
    }
    let dir = span.signum();
    let min_step = 1e-14 * (1.0 + x0.abs());
    let mut h = match h_start {
        Some(hp) if hp != 0.0 && hp.signum() == dir => hp.abs().min(span.abs()) * dir,
        _ => span / 16.0,
    };
    let mut x = x0;
    let mut y = y0;
    let mut k1 = rhs(x, y);
    loop {
        if (xend - x) * dir <= 0.0 {
            return Ok((y, h));
        }
        if (x + h - xend) * dir > 0.0 {
            h = xend - x;
        }
        if h.abs() < min_step {
            return Err(Error::StepperStalled {
                at: x,
                min_step,
            });
        }
        let k2 = rhs(x + C2 * h, y + h * A21 * k1);
        let k3 = rhs(x + C3 * h, y + h * (A31 * k1 + A32 * k2));
        let k4 = rhs(x + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = rhs(x + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = rhs(
            x + h,
            y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
        );
        let ynew = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = rhs(x + h, ynew);
        let err_raw =
            h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let scale = atol + rtol * y.abs().max(ynew.abs());
        let err = (err_raw / scale).abs();
        if err <= 1.0 || h.abs() <= min_step * 2.0 {
            x += h;
            y = ynew;
            k1 = k7; // FSAL
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if !y.is_finite() {
            return Err(Error::StepperStalled {
                at: x,
                min_step,
            });
        }
    }
}
