//! Lyapunov exponent of the linearization, by independent routes:
//!
//! * quadrature of (1/2) f'' f against the stationary density,
//! * the flux form -rho * int (f'/f) p (non-vanishing coupling only),
//! * Monte Carlo on the exact linearization d r = (1/2) f'' f dt + f' dW,
//! * the log-separation slope of two trajectories under common noise.
//!
//! Agreement across routes is itself the main correctness check.

use crate::density::DensityGrid;
use crate::dynamics::step_heun;
use crate::error::{Error, Result};
use crate::grid::{circle_distance, periodic_integral, wrap_phase};
use crate::model::{NoiseClass, OscillatorModel};
use crate::noise::NoiseStream;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Residual threshold factor for accepting a density into the quadrature.
const STALE_FACTOR: f64 = 1e-4;
/// Two-point regression window: below the floor circle distances collapse to
/// floating-point identity, above the cap nonlinear terms bias the slope.
const WINDOW_FLOOR: f64 = 1e-12;
const WINDOW_CAP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FkQuadrature,
    FluxForm,
    MonteCarlo,
    TwoPoint,
}

/// One Lyapunov estimate with its statistical error (0 for deterministic
/// quadrature) and the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: Method,
    pub metadata: Vec<(String, f64)>,
}

/// lambda = (1/2) int f'' f p dphi.
pub fn lyapunov_quadrature(m: &OscillatorModel, d: &DensityGrid) -> Result<LyapunovEstimate> {
    let threshold = STALE_FACTOR * 2.0 * m.rho() * d.max_p();
    if d.residual > threshold {
        return Err(Error::StaleDensity {
            residual: d.residual,
            threshold,
        });
    }
    let vals: Vec<f64> = d
        .grid
        .nodes()
        .zip(d.p.iter())
        .map(|(phi, &p)| m.f2(phi) * m.f(phi) * p)
        .collect();
    let value = 0.5 * periodic_integral(&vals)?;
    Ok(LyapunovEstimate {
        value,
        stderr: 0.0,
        method: Method::FkQuadrature,
        metadata: vec![("n".into(), d.grid.len() as f64)],
    })
}

/// lambda = -rho int (f'/f) p dphi; only defined when f never vanishes.
pub fn lyapunov_flux_form(m: &OscillatorModel, d: &DensityGrid) -> Result<LyapunovEstimate> {
    if d.case == NoiseClass::Vanishing {
        return Err(Error::VanishingNoise);
    }
    let value = if m.coupling_is_zero() {
        0.0
    } else {
        let vals: Vec<f64> = d
            .grid
            .nodes()
            .zip(d.p.iter())
            .map(|(phi, &p)| m.f1(phi) / m.f(phi) * p)
            .collect();
        -m.rho() * periodic_integral(&vals)?
    };
    Ok(LyapunovEstimate {
        value,
        stderr: 0.0,
        method: Method::FluxForm,
        metadata: vec![("n".into(), d.grid.len() as f64)],
    })
}

/// Monte Carlo: co-integrate the phase (Stratonovich-Heun) and the log
/// derivative r (Euler-Maruyama on its Ito form) with shared increments;
/// each path contributes r(T)/T.
pub fn lyapunov_monte_carlo(
    m: &OscillatorModel,
    seed: u64,
    n_paths: usize,
    horizon: f64,
    dt: f64,
) -> Result<LyapunovEstimate> {
    if n_paths < 2 {
        return Err(Error::InvalidParams(format!(
            "need at least 2 paths, got {n_paths}"
        )));
    }
    if !horizon.is_finite() || horizon <= 0.0 || !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "need horizon > 0 and dt > 0, got horizon = {horizon}, dt = {dt}"
        )));
    }
    let n_steps = (horizon / dt).round() as u64;
    let t_end = n_steps as f64 * dt;
    let base = NoiseStream::new(seed, dt);
    let estimates: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|k| {
            let stream = base.substream(k as u64);
            let mut phi = 0.0_f64;
            let mut r = 0.0_f64;
            for step in 0..n_steps {
                let dw = stream.increment(step);
                r += 0.5 * m.f2(phi) * m.f(phi) * dt + m.f1(phi) * dw;
                phi = step_heun(m, phi, dw, dt);
            }
            r / t_end
        })
        .collect();
    let nf = n_paths as f64;
    let mean = estimates.iter().sum::<f64>() / nf;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(LyapunovEstimate {
        value: mean,
        stderr: (var / nf).sqrt(),
        method: Method::MonteCarlo,
        metadata: vec![
            ("n_paths".into(), nf),
            ("horizon".into(), t_end),
            ("dt".into(), dt),
        ],
    })
}

/// Slope of the log circle-distance between two trajectories driven by the
/// same increments, fitted by least squares over the decay window.
pub fn lyapunov_two_point(
    m: &OscillatorModel,
    seed: u64,
    x0: f64,
    y0: f64,
    horizon: f64,
    dt: f64,
) -> Result<LyapunovEstimate> {
    if circle_distance(x0, y0) <= 1e-6 {
        return Err(Error::InvalidParams(format!(
            "initial separation too small: d({x0}, {y0}) <= 1e-6"
        )));
    }
    if !horizon.is_finite() || horizon <= 0.0 || !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidParams("need horizon > 0 and dt > 0".into()));
    }
    let stream = NoiseStream::new(seed, dt);
    let n_steps = (horizon / dt).round() as u64;
    let checkpoint = ((0.1 / dt).round() as u64).max(1);
    let mut x = wrap_phase(x0);
    let mut y = wrap_phase(y0);
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for k in 0..n_steps {
        let dw = stream.increment(k);
        x = step_heun(m, x, dw, dt);
        y = step_heun(m, y, dw, dt);
        if (k + 1) % checkpoint == 0 {
            let d = circle_distance(x, y);
            if d > WINDOW_FLOOR && d < WINDOW_CAP {
                samples.push(((k + 1) as f64 * dt, d.ln()));
            }
            if d <= WINDOW_FLOOR {
                break;
            }
        }
    }
    // A usable window needs enough points and an actual decay through it;
    // a constant separation (identical drift and diffusion) never qualifies.
    if samples.len() < 8 || samples[0].1 - samples[samples.len() - 1].1 < 2.0 {
        return Err(Error::NoDecayWindow);
    }
    let (slope, stderr) = ols_slope(&samples);
    Ok(LyapunovEstimate {
        value: slope,
        stderr,
        method: Method::TwoPoint,
        metadata: vec![
            ("window_points".into(), samples.len() as f64),
            ("horizon".into(), horizon),
            ("dt".into(), dt),
        ],
    })
}

fn ols_slope(samples: &[(f64, f64)]) -> (f64, f64) {
    let n = samples.len() as f64;
    let tbar = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let sbar = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx = samples.iter().map(|s| (s.0 - tbar).powi(2)).sum::<f64>();
    let sxy = samples
        .iter()
        .map(|s| (s.0 - tbar) * (s.1 - sbar))
        .sum::<f64>();
    let slope = sxy / sxx;
    let intercept = sbar - slope * tbar;
    let ss_res = samples
        .iter()
        .map(|s| (s.1 - intercept - slope * s.0).powi(2))
        .sum::<f64>();
    let stderr = if samples.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, stderr)
}

/// Per-interval contributions I_i = int f'' f p over each inter-zero
/// interval; their sum is 2 lambda.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalContributions {
    pub intervals: Vec<IntervalContribution>,
    /// |sum I_i - 2 lambda_quadrature|.
    pub sum_check: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalContribution {
    pub lo: f64,
    pub hi: f64,
    pub i: f64,
}

/// Integrate f'' f p over each interval between consecutive zeros (one
/// global interval when there are none). Every grid node is assigned to
/// exactly one interval, so the contributions re-group the same rectangle
/// sum that the quadrature estimator uses and their total matches 2 lambda
/// to rounding.
pub fn interval_contributions(
    m: &OscillatorModel,
    d: &DensityGrid,
) -> Result<IntervalContributions> {
    let zeros = m.find_zeros(crate::model::default_scan_grid(m.coupling().degree()))?;
    let h = d.grid.spacing();
    let vals: Vec<f64> = d
        .grid
        .nodes()
        .zip(d.p.iter())
        .map(|(phi, &p)| m.f2(phi) * m.f(phi) * p)
        .collect();
    let lambda = lyapunov_quadrature(m, d)?.value;

    let zs = zeros.phis();
    let intervals: Vec<IntervalContribution> = if zs.is_empty() {
        let total = h * vals.iter().sum::<f64>();
        vec![IntervalContribution {
            lo: 0.0,
            hi: TAU,
            i: total,
        }]
    } else {
        let k = zs.len();
        let mut sums = vec![0.0_f64; k];
        for (j, &v) in vals.iter().enumerate() {
            let phi = d.grid.node(j);
            // Interval index: largest i with z_i <= phi, wrapping below z_0.
            let idx = match zs.iter().rposition(|&z| z <= phi) {
                Some(i) => i,
                None => k - 1,
            };
            sums[idx] += v;
        }
        (0..k)
            .map(|i| IntervalContribution {
                lo: zs[i],
                hi: if i + 1 < k { zs[i + 1] } else { zs[0] + TAU },
                i: h * sums[i],
            })
            .collect()
    };
    let total: f64 = intervals.iter().map(|iv| iv.i).sum();
    Ok(IntervalContributions {
        sum_check: (total - 2.0 * lambda).abs(),
        intervals,
    })
}
