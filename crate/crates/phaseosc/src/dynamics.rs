//! Path simulation on the circle: Stratonovich-Heun and Ito-Euler steps,
//! common-noise ensembles, and pullback convergence to the random fixed
//! point.

use crate::error::{Error, Result};
use crate::grid::{circle_distance, wrap_phase};
use crate::model::OscillatorModel;
use crate::noise::NoiseStream;

/// One Stratonovich-Heun predictor-corrector step.
pub fn step_heun(m: &OscillatorModel, phi: f64, dw: f64, dt: f64) -> f64 {
    let drift = m.rho() * dt;
    let g0 = m.f(phi);
    let pred = phi + drift + g0 * dw;
    wrap_phase(phi + drift + 0.5 * (g0 + m.f(pred)) * dw)
}

/// One Euler-Maruyama step on the equivalent Ito form; an independent
/// discretization of the same law, kept for cross-validation.
pub fn step_ito_em(m: &OscillatorModel, phi: f64, dw: f64, dt: f64) -> f64 {
    wrap_phase(phi + m.ito_drift(phi) * dt + m.f(phi) * dw)
}

/// A recorded trajectory: `times[i]` and `phases[i]` every `stride` steps,
/// with optional log-derivative samples alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub times: Vec<f64>,
    pub phases: Vec<f64>,
    pub log_deriv: Option<Vec<f64>>,
}

/// Iterate the Heun scheme from `x0` for `horizon` time units, recording
/// every `record_stride` steps (stride 0 is treated as 1). Deterministic in
/// (stream, x0).
pub fn simulate_path(
    m: &OscillatorModel,
    stream: &NoiseStream,
    x0: f64,
    horizon: f64,
    record_stride: usize,
) -> Result<PathRecord> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::InvalidHorizon(horizon));
    }
    let dt = stream.dt();
    let stride = record_stride.max(1);
    let n_steps = (horizon / dt).round() as u64;
    let mut phi = wrap_phase(x0);
    let mut times = Vec::with_capacity(n_steps as usize / stride + 2);
    let mut phases = Vec::with_capacity(times.capacity());
    times.push(0.0);
    phases.push(phi);
    for k in 0..n_steps {
        phi = step_heun(m, phi, stream.increment(k), dt);
        if (k + 1) % stride as u64 == 0 || k + 1 == n_steps {
            times.push((k + 1) as f64 * dt);
            phases.push(phi);
        }
    }
    Ok(PathRecord {
        times,
        phases,
        log_deriv: None,
    })
}

/// Like `simulate_path`, but co-integrates the log derivative r = ln|Dphi|
/// of the linearization along the path (Euler-Maruyama on its Ito form,
/// sharing the increments) and records it alongside the phases.
pub fn simulate_path_linearized(
    m: &OscillatorModel,
    stream: &NoiseStream,
    x0: f64,
    horizon: f64,
    record_stride: usize,
) -> Result<PathRecord> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::InvalidHorizon(horizon));
    }
    let dt = stream.dt();
    let stride = record_stride.max(1);
    let n_steps = (horizon / dt).round() as u64;
    let mut phi = wrap_phase(x0);
    let mut r = 0.0_f64;
    let mut times = vec![0.0];
    let mut phases = vec![phi];
    let mut log_deriv = vec![0.0];
    for k in 0..n_steps {
        let dw = stream.increment(k);
        r += 0.5 * m.f2(phi) * m.f(phi) * dt + m.f1(phi) * dw;
        phi = step_heun(m, phi, dw, dt);
        if (k + 1) % stride as u64 == 0 || k + 1 == n_steps {
            times.push((k + 1) as f64 * dt);
            phases.push(phi);
            log_deriv.push(r);
        }
    }
    Ok(PathRecord {
        times,
        phases,
        log_deriv: Some(log_deriv),
    })
}

/// Whether ensemble members share one Brownian realization or get
/// independent ones (the control experiment).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseCoupling {
    Common,
    Independent,
}

/// State of the ensemble at one instant, with the synchronization
/// diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSnapshot {
    pub t: f64,
    pub phases: Vec<f64>,
    pub max_pairwise_dist: f64,
    /// |mean of unit phasors|, 1 iff all phases coincide.
    pub order_parameter: f64,
}

fn snapshot(t: f64, phases: &[f64]) -> EnsembleSnapshot {
    let mut max_d = 0.0_f64;
    for i in 0..phases.len() {
        for j in (i + 1)..phases.len() {
            max_d = max_d.max(circle_distance(phases[i], phases[j]));
        }
    }
    let n = phases.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &p in phases {
        sx += p.cos();
        sy += p.sin();
    }
    EnsembleSnapshot {
        t,
        phases: phases.to_vec(),
        max_pairwise_dist: max_d,
        order_parameter: (sx * sx + sy * sy).sqrt() / n,
    }
}

/// Advance all members together and emit snapshots at the requested times
/// (rounded to whole steps). With `Common` coupling every member sees the
/// same increments; with `Independent`, member k reads substream k.
pub fn simulate_ensemble(
    m: &OscillatorModel,
    stream: &NoiseStream,
    x0s: &[f64],
    horizon: f64,
    snapshot_times: &[f64],
    coupling: NoiseCoupling,
) -> Result<Vec<EnsembleSnapshot>> {
    if x0s.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "ensemble needs at least 2 members, got {}",
            x0s.len()
        )));
    }
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::InvalidHorizon(horizon));
    }
    let dt = stream.dt();
    let n_steps = (horizon / dt).round() as u64;
    let mut snap_steps: Vec<u64> = snapshot_times
        .iter()
        .map(|&t| (t / dt).round().clamp(0.0, n_steps as f64) as u64)
        .collect();
    snap_steps.sort_unstable();
    snap_steps.dedup();

    let streams: Vec<NoiseStream> = (0..x0s.len())
        .map(|k| match coupling {
            NoiseCoupling::Common => *stream,
            NoiseCoupling::Independent => stream.substream(k as u64),
        })
        .collect();

    let mut phases: Vec<f64> = x0s.iter().map(|&x| wrap_phase(x)).collect();
    let mut out = Vec::with_capacity(snap_steps.len());
    let mut next = snap_steps.iter().peekable();
    if let Some(&&0) = next.peek() {
        out.push(snapshot(0.0, &phases));
        next.next();
    }
    for k in 0..n_steps {
        for (i, phi) in phases.iter_mut().enumerate() {
            *phi = step_heun(m, *phi, streams[i].increment(k), dt);
        }
        if let Some(&&s) = next.peek() {
            if s == k + 1 {
                out.push(snapshot((k + 1) as f64 * dt, &phases));
                next.next();
            }
        }
    }
    Ok(out)
}

/// Endpoints at time 0 when the ensemble is released at time -depth on one
/// fixed noise realization.
#[derive(Debug, Clone, PartialEq)]
pub struct PullbackSample {
    pub depth: f64,
    pub endpoints: Vec<f64>,
    /// Max pairwise circle distance across endpoints.
    pub spread: f64,
}

/// Pullback experiment: one increment array indexed over [-T_max, 0]; each
/// depth T starts at offset (T_max - T)/dt and runs to time 0. Convergence
/// shows up as the endpoint spread collapsing and the endpoints stabilizing
/// across successive depths.
pub fn pullback(
    m: &OscillatorModel,
    stream: &NoiseStream,
    x0s: &[f64],
    depths: &[f64],
) -> Result<Vec<PullbackSample>> {
    if x0s.is_empty() {
        return Err(Error::InvalidInput("pullback needs initial points".into()));
    }
    if depths.is_empty() || depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "depths must be strictly increasing".into(),
        ));
    }
    if depths[0] <= 0.0 || !depths.iter().all(|d| d.is_finite()) {
        return Err(Error::InvalidInput("depths must be positive".into()));
    }
    let dt = stream.dt();
    let buffer = (depths[depths.len() - 1] / dt).round() as u64;
    let mut out = Vec::with_capacity(depths.len());
    for &depth in depths {
        let steps = (depth / dt).round() as u64;
        if steps > buffer {
            return Err(Error::DepthExceedsBuffer { depth, buffer });
        }
        let start = buffer - steps;
        let endpoints: Vec<f64> = x0s
            .iter()
            .map(|&x0| {
                let mut phi = wrap_phase(x0);
                for k in 0..steps {
                    phi = step_heun(m, phi, stream.increment(start + k), dt);
                }
                phi
            })
            .collect();
        let mut spread = 0.0_f64;
        for i in 0..endpoints.len() {
            for j in (i + 1)..endpoints.len() {
                spread = spread.max(circle_distance(endpoints[i], endpoints[j]));
            }
        }
        out.push(PullbackSample {
            depth,
            endpoints,
            spread,
        });
    }
    Ok(out)
}
