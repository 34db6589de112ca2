//! Stationary Fokker-Planck solvers.
//!
//! The stationary density solves f^2 p' = (2 rho - f' f) p + C with an
//! unknown flux constant C, periodicity, and unit mass. Two regimes:
//!
//! * Non-vanishing coupling: the equation is a regular linear ODE. The map
//!   (p(0), C) -> solution is linear, so two integrating-factor sweeps and a
//!   2x2 system for periodicity + normalization finish the job.
//!
//! * Vanishing coupling: f has (transversal) zeros, where the equation is
//!   singular and pins p(z) = -C/(2 rho). Joint linearity in (p, C) lets us
//!   fix C = -1, integrate each inter-zero interval, and rescale once at the
//!   end. Within an interval the homogeneous mode exp(int 2 rho / f^2) grows
//!   monotonically in phi, by factors like exp(1/delta) near the zeros, so
//!   the only usable direction is right-to-left: integrating toward the left
//!   zero contracts perturbations, while integrating away from it would
//!   amplify the start-up error astronomically. Each interval is therefore
//!   swept once, from a boundary-series start one cell short of its right
//!   zero down to one cell short of its left zero, where the emerging values
//!   must reproduce the left boundary series; the match is the consistency
//!   check on the boundary-value problem.

use crate::error::{Error, Result};
use crate::grid::{circle_distance, periodic_integral, CircleGrid};
use crate::model::{NoiseClass, OscillatorModel, TRANSVERSALITY_REL};
use crate::noise::NoiseStream;
use crate::ode::integrate_to_targets;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Condition-number ceiling for the periodicity/normalization system.
const COND_LIMIT: f64 = 1e12;
/// Relative tolerance for the left-boundary consistency check.
const MATCHING_TOL: f64 = 1e-4;
/// Stepper tolerances for the per-interval sweeps.
const SWEEP_RTOL: f64 = 1e-10;
const SWEEP_ATOL: f64 = 1e-12;

/// Stationary density on a uniform circle grid plus the flux constant.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub grid: CircleGrid,
    /// Density values (1/rad), nonnegative.
    pub p: Vec<f64>,
    /// Flux constant of the stationary equation.
    pub c: f64,
    pub case: NoiseClass,
    /// Max pointwise residual of the stationary equation (diagnostic).
    pub residual: f64,
}

impl DensityGrid {
    pub fn max_p(&self) -> f64 {
        self.p.iter().fold(0.0_f64, |m, &x| m.max(x))
    }

    pub fn min_p(&self) -> f64 {
        self.p.iter().fold(f64::INFINITY, |m, &x| m.min(x))
    }

    /// Cubic Lagrange interpolation of the density at an arbitrary phase.
    pub fn value_at(&self, phi: f64) -> f64 {
        let n = self.grid.len();
        let h = self.grid.spacing();
        let x = crate::grid::wrap_phase(phi) / h;
        let j1 = x.floor() as usize % n;
        let t = x - x.floor();
        let pm = self.p[(j1 + n - 1) % n];
        let p0 = self.p[j1];
        let p1 = self.p[(j1 + 1) % n];
        let p2 = self.p[(j1 + 2) % n];
        // Lagrange basis on nodes -1, 0, 1, 2.
        let lm = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let l0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let l1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let l2 = (t + 1.0) * t * (t - 1.0) / 6.0;
        pm * lm + p0 * l0 + p1 * l1 + p2 * l2
    }
}

/// Dispatch on the zero set of the effective coupling.
pub fn solve_density(m: &OscillatorModel, n: usize) -> Result<DensityGrid> {
    let zeros = m.find_zeros(crate::model::default_scan_grid(m.coupling().degree()))?;
    match zeros.classification {
        NoiseClass::NonVanishing => solve_density_nonvanishing(m, n),
        NoiseClass::Vanishing => solve_density_vanishing(m, n),
    }
}

/// Solver for couplings with no zeros (plus the degenerate zero-coupling
/// case, where the density is exactly uniform).
pub fn solve_density_nonvanishing(m: &OscillatorModel, n: usize) -> Result<DensityGrid> {
    let grid = CircleGrid::new(n)?;
    let zeros = m.find_zeros(crate::model::default_scan_grid(m.coupling().degree()))?;
    if zeros.classification == NoiseClass::Vanishing {
        return Err(Error::NotNonVanishing);
    }

    if m.coupling().max_harmonic() < crate::model::COEFF_TOL {
        // Constant (possibly zero) coupling: p' = 0, so the density is
        // exactly uniform and the stationary equation gives
        // 0 = 2 rho / (2 pi) + C.
        let p = vec![1.0 / TAU; n];
        let mut d = DensityGrid {
            grid,
            p,
            c: -m.rho() / std::f64::consts::PI,
            case: NoiseClass::NonVanishing,
            residual: 0.0,
        };
        fp_residual(&mut d, m);
        return Ok(d);
    }

    let rho = m.rho();
    let f0 = m.f(0.0);
    // h(phi) = int 2 rho / f^2, r(phi) = int exp(-h)/f, both to O(h^4).
    let (hcum, rcum) = crate::grid::cumulative_pair_rk4(
        &grid,
        |x| 2.0 * rho / m.f(x).powi(2),
        |x, h| (-h).exp() / m.f(x),
    );
    let h_wrap = hcum[n];
    if !h_wrap.is_finite() || h_wrap > 700.0 {
        return Err(Error::IllConditioned { cond: f64::INFINITY });
    }

    // Basis solutions: sol_a has (p(0), C) = (1, 0), sol_b has (0, 1).
    let mut sol_a = Vec::with_capacity(n);
    let mut sol_b = Vec::with_capacity(n);
    for j in 0..n {
        let growth = hcum[j].exp() / m.f(grid.node(j));
        sol_a.push(f0 * growth);
        sol_b.push(rcum[j] * growth);
    }

    // Periodicity row: p(2 pi) - p(0) = 0; normalization row: mass = 1.
    let a11 = h_wrap.exp() - 1.0;
    let a12 = rcum[n] * h_wrap.exp() / f0;
    let a21 = periodic_integral(&sol_a)?;
    let a22 = periodic_integral(&sol_b)?;
    let cond = cond_2x2(a11, a12, a21, a22);
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(Error::IllConditioned { cond });
    }
    let det = a11 * a22 - a12 * a21;
    let p0 = -a12 / det;
    let c = a11 / det;

    let mut p: Vec<f64> = (0..n).map(|j| p0 * sol_a[j] + c * sol_b[j]).collect();
    clamp_roundoff_negatives(&mut p)?;
    let mut d = DensityGrid {
        grid,
        p,
        c,
        case: NoiseClass::NonVanishing,
        residual: 0.0,
    };
    fp_residual(&mut d, m);
    Ok(d)
}

/// Densities may dip below zero only at roundoff level; anything worse is a
/// solver failure, not something to paper over.
fn clamp_roundoff_negatives(p: &mut [f64]) -> Result<()> {
    let min = p.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min < -1e-9 {
        return Err(Error::InvalidInput(format!(
            "solver produced negative density (min p = {min:.3e})"
        )));
    }
    for x in p {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    Ok(())
}

/// Solver for couplings with transversal zeros.
pub fn solve_density_vanishing(m: &OscillatorModel, n: usize) -> Result<DensityGrid> {
    let grid = CircleGrid::new(n)?;
    let report = m.check_genericity();
    let zeros = &report.zero_set;
    if zeros.is_empty() {
        return Err(Error::InvalidInput(
            "coupling has no zeros; use the non-vanishing solver".into(),
        ));
    }
    let scan = CircleGrid::new(crate::model::default_scan_grid(m.coupling().degree()))
        .expect("scan grid");
    let max_slope = scan
        .nodes()
        .map(|p| m.f1(p).abs())
        .fold(0.0_f64, f64::max);
    for z in &zeros.zeros {
        if z.slope.abs() <= TRANSVERSALITY_REL * max_slope {
            return Err(Error::NonTransversalZero {
                phi: z.phi,
                slope: z.slope,
            });
        }
    }

    let zs = zeros.phis();
    let k = zs.len();

    // Fix C = -1: every zero then carries p(z) = 1/(2 rho), and the pair
    // (p, C) is rescaled jointly after gluing.
    let c_fixed = -1.0;
    let intervals: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let lo = zs[i];
            let hi = if i + 1 < k { zs[i + 1] } else { zs[0] + TAU };
            (lo, hi)
        })
        .collect();

    let pieces: Vec<Result<Vec<(usize, f64)>>> = intervals
        .par_iter()
        .map(|&(lo, hi)| sweep_interval(m, &grid, lo, hi, c_fixed))
        .collect();

    let mut p = vec![f64::NAN; n];
    for piece in pieces {
        for (j, value) in piece? {
            p[j] = value;
        }
    }
    debug_assert!(p.iter().all(|x| x.is_finite()));

    let mass = periodic_integral(&p)?;
    if mass.is_nan() || mass <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "vanishing-case density has non-positive mass {mass}"
        )));
    }
    for x in &mut p {
        *x /= mass;
    }
    clamp_roundoff_negatives(&mut p)?;
    let c = c_fixed / mass;
    debug_assert!(c < 0.0, "flux constant must stay negative, got {c}");

    let mut d = DensityGrid {
        grid,
        p,
        c,
        case: NoiseClass::Vanishing,
        residual: 0.0,
    };
    fp_residual(&mut d, m);
    Ok(d)
}

/// Cubic boundary series around a zero z, from repeatedly differentiating
/// the stationary equation and evaluating where f vanishes:
///   p(z)    = -C / (2 rho)
///   p'(z)   = f'^2 p / (2 rho)
///   p''(z)  = (4 f'^2 p' + 3 f'' f' p) / (2 rho)
///   p'''(z) = (9 f'^2 p'' + 15 f' f'' p' + (4 f''' f' + 3 f''^2) p) / (2 rho)
/// (all coupling derivatives taken at z).
struct BoundarySeries {
    p: f64,
    dp: f64,
    d2p: f64,
    d3p: f64,
}

impl BoundarySeries {
    fn at_zero(m: &OscillatorModel, z: f64, c: f64) -> Self {
        let rho2 = 2.0 * m.rho();
        let f1 = m.f1(z);
        let f2 = m.f2(z);
        let f3 = m.f3(z);
        let p = -c / rho2;
        let dp = f1 * f1 * p / rho2;
        let d2p = (4.0 * f1 * f1 * dp + 3.0 * f2 * f1 * p) / rho2;
        let d3p =
            (9.0 * f1 * f1 * d2p + 15.0 * f1 * f2 * dp + (4.0 * f3 * f1 + 3.0 * f2 * f2) * p)
                / rho2;
        Self { p, dp, d2p, d3p }
    }

    fn eval(&self, dx: f64) -> f64 {
        self.p + dx * (self.dp + dx * (0.5 * self.d2p + dx * self.d3p / 6.0))
    }
}

/// Sweep one inter-zero interval (lo, hi) right-to-left and return the
/// (node index, unnormalized density) pairs the interval owns.
///
/// The sweep runs between the outermost grid nodes that sit at least ~3/4 of
/// a cell away from either zero, so every node that can enter a residual
/// stencil carries a stepper-accurate value; at most one node per end is
/// filled from the boundary series.
fn sweep_interval(
    m: &OscillatorModel,
    grid: &CircleGrid,
    lo: f64,
    hi: f64,
    c: f64,
) -> Result<Vec<(usize, f64)>> {
    let n = grid.len();
    let h = grid.spacing();
    let pad = 0.75 * h;

    let left = BoundarySeries::at_zero(m, crate::grid::wrap_phase(lo), c);
    let right = BoundarySeries::at_zero(m, crate::grid::wrap_phase(hi), c);

    // Nodes owned by this interval, in unwrapped coordinates.
    let j_first = (lo / h).ceil() as i64;
    let j_last = ((hi - 1e-12 * TAU) / h).floor() as i64;
    let mut owned: Vec<(usize, f64)> = Vec::new();
    for j in j_first..=j_last {
        let phi = j as f64 * h;
        if phi >= lo && phi < hi {
            owned.push(((j.rem_euclid(n as i64)) as usize, phi));
        }
    }

    let interior: Vec<(usize, f64)> = owned
        .iter()
        .copied()
        .filter(|&(_, phi)| phi - lo >= pad && hi - phi >= pad)
        .collect();

    let mut out = Vec::with_capacity(owned.len());
    if interior.len() < 2 {
        // Interval too narrow to sweep: series fill from the nearer zero.
        for &(j, phi) in &owned {
            let value = if phi - lo <= hi - phi {
                left.eval(phi - lo)
            } else {
                right.eval(phi - hi)
            };
            out.push((j, value));
        }
        return Ok(out);
    }

    // Start from the series at the rightmost interior node (within one cell
    // of the right zero, where the cubic series is accurate to O(h^4)) and
    // integrate down to the leftmost interior node. Start-up error only
    // damps in this direction.
    let (_, x_start) = *interior.last().expect("interior nonempty");
    let targets: Vec<f64> = interior[..interior.len() - 1]
        .iter()
        .rev()
        .map(|&(_, phi)| phi)
        .collect();
    let rhs = |x: f64, y: f64| {
        let f = m.f(x);
        let f2 = f * f;
        (2.0 * m.rho() / f2 - m.f1(x) / f) * y + c / f2
    };
    let y_start = right.eval(x_start - hi);
    let swept = integrate_to_targets(rhs, x_start, y_start, &targets, SWEEP_RTOL, SWEEP_ATOL)
        .map_err(|e| match e {
            Error::StepperStalled { .. } => Error::BoundaryMismatch {
                lo,
                hi,
                mismatch: f64::INFINITY,
                tol: MATCHING_TOL,
            },
            other => other,
        })?;

    // The left boundary value was never imposed; it must emerge from the
    // sweep. Failing to reproduce the series there means the smoothness
    // assumption at the zero does not hold for this model/resolution.
    let (_, x_end) = interior[0];
    let y_end = swept.last().copied().unwrap_or(y_start);
    let expected = left.eval(x_end - lo);
    let mismatch = (y_end - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
    if mismatch > MATCHING_TOL {
        return Err(Error::BoundaryMismatch {
            lo,
            hi,
            mismatch,
            tol: MATCHING_TOL,
        });
    }

    // interior[last] holds the series start; interior[i] for i < last maps to
    // swept[last - 1 - i] (targets were the remaining nodes reversed).
    let last = interior.len() - 1;
    out.push((interior[last].0, y_start));
    for (i, &(j, _)) in interior[..last].iter().enumerate() {
        out.push((j, swept[last - 1 - i]));
    }
    for &(j, phi) in &owned {
        if phi - lo < pad {
            out.push((j, left.eval(phi - lo)));
        } else if hi - phi < pad {
            out.push((j, right.eval(phi - hi)));
        }
    }
    Ok(out)
}

/// Empirical stationary density from one long trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDensity {
    pub bins: usize,
    pub counts: Vec<u64>,
    /// Normalized histogram (1/rad).
    pub estimate: Vec<f64>,
    pub total_samples: u64,
    pub burn_in_time: f64,
}

/// Occupation-measure estimate of the stationary density: simulate one long
/// Heun path, drop the burn-in, and histogram every post-burn-in state.
/// Deterministic given the seed.
pub fn empirical_density(
    m: &OscillatorModel,
    seed: u64,
    total_time: f64,
    burn_in: f64,
    bins: usize,
    dt: f64,
) -> Result<EmpiricalDensity> {
    if !total_time.is_finite() || !burn_in.is_finite() || total_time <= burn_in || burn_in <= 0.0
    {
        return Err(Error::InvalidTimes(format!(
            "need total_time > burn_in > 0, got total_time = {total_time}, burn_in = {burn_in}"
        )));
    }
    if !dt.is_finite() || dt <= 0.0 || dt > 1e-2 {
        return Err(Error::InvalidTimes(format!(
            "need 0 < dt <= 1e-2, got {dt}"
        )));
    }
    if bins == 0 {
        return Err(Error::InvalidTimes("need at least one bin".into()));
    }
    let stream = NoiseStream::new(seed, dt);
    let n_steps = (total_time / dt).round() as u64;
    let burn_steps = (burn_in / dt).round() as u64;
    let width = TAU / bins as f64;
    let mut counts = vec![0_u64; bins];
    let mut phi = 0.0_f64;
    for k in 0..n_steps {
        phi = crate::dynamics::step_heun(m, phi, stream.increment(k), dt);
        if k + 1 > burn_steps {
            let mut b = (phi / width) as usize;
            if b >= bins {
                b = bins - 1;
            }
            counts[b] += 1;
        }
    }
    let total_samples = n_steps - burn_steps;
    let norm = total_samples as f64 * width;
    let estimate = counts.iter().map(|&c| c as f64 / norm).collect();
    Ok(EmpiricalDensity {
        bins,
        counts,
        estimate,
        total_samples,
        burn_in_time: burn_in,
    })
}

/// Max pointwise residual of f^2 p' - (2 rho - f' f) p - C with p' from
/// 4th-order central differences. In the vanishing case, nodes within 4h of
/// a zero are excluded (the series start carries O(delta^2) error there).
/// The result is stored into `d.residual` and returned.
pub fn fp_residual(d: &mut DensityGrid, m: &OscillatorModel) -> f64 {
    let n = d.grid.len();
    let h = d.grid.spacing();
    let zeros = if d.case == NoiseClass::Vanishing {
        m.find_zeros(crate::model::default_scan_grid(m.coupling().degree()))
            .map(|z| z.phis())
            .unwrap_or_default()
    } else {
        vec![]
    };
    let mut max_res = 0.0_f64;
    for j in 0..n {
        let phi = d.grid.node(j);
        if zeros
            .iter()
            .any(|&z| circle_distance(phi, z) < 4.0 * h)
        {
            continue;
        }
        let pm2 = d.p[(j + n - 2) % n];
        let pm1 = d.p[(j + n - 1) % n];
        let pp1 = d.p[(j + 1) % n];
        let pp2 = d.p[(j + 2) % n];
        let dp = (-pp2 + 8.0 * pp1 - 8.0 * pm1 + pm2) / (12.0 * h);
        let f = m.f(phi);
        let res = f * f * dp - (2.0 * m.rho() - m.f1(phi) * f) * d.p[j] - d.c;
        max_res = max_res.max(res.abs());
    }
    d.residual = max_res;
    max_res
}

/// L1 distance between a solved density and an empirical histogram,
/// averaging the solved density over each bin.
pub fn l1_distance(d: &DensityGrid, e: &EmpiricalDensity) -> f64 {
    let n = d.grid.len();
    let width = TAU / e.bins as f64;
    let mut sums = vec![0.0_f64; e.bins];
    let mut cnts = vec![0_u32; e.bins];
    for j in 0..n {
        let mut b = (d.grid.node(j) / width) as usize;
        if b >= e.bins {
            b = e.bins - 1;
        }
        sums[b] += d.p[j];
        cnts[b] += 1;
    }
    let mut l1 = 0.0;
    for b in 0..e.bins {
        let avg = if cnts[b] > 0 {
            sums[b] / cnts[b] as f64
        } else {
            d.value_at((b as f64 + 0.5) * width)
        };
        l1 += (avg - e.estimate[b]).abs() * width;
    }
    l1
}

fn cond_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let t = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    if det == 0.0 || !t.is_finite() {
        return f64::INFINITY;
    }
    let disc = (t * t - 4.0 * det * det).max(0.0).sqrt();
    let smax2 = 0.5 * (t + disc);
    // sigma_max * sigma_min = |det|, which avoids cancellation in the small
    // singular value.
    smax2 / det.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierFunction;
    use std::f64::consts::PI;

    fn two_plus_sin(rho: f64) -> OscillatorModel {
        OscillatorModel::new(rho, FourierFunction::new(2.0, vec![0.0], vec![1.0]), 1.0).unwrap()
    }

    fn sigma_sin(rho: f64, sigma: f64) -> OscillatorModel {
        OscillatorModel::new(rho, FourierFunction::sin(1.0), sigma).unwrap()
    }

    #[test]
    fn constant_coupling_gives_uniform_density() {
        let m = OscillatorModel::new(1.0, FourierFunction::constant(0.7), 1.0).unwrap();
        let d = solve_density_nonvanishing(&m, 512).unwrap();
        for &p in &d.p {
            assert!((p - 1.0 / TAU).abs() < 1e-10, "p = {p}");
        }
        assert!((d.c - (-1.0 / PI)).abs() < 1e-10, "C = {}", d.c);
        assert!(d.residual < 1e-12);
    }

    #[test]
    fn zero_coupling_gives_uniform_density() {
        let m = OscillatorModel::new(2.0, FourierFunction::sin(1.0), 0.0).unwrap();
        let d = solve_density_nonvanishing(&m, 256).unwrap();
        assert!(d.p.iter().all(|&p| (p - 1.0 / TAU).abs() < 1e-15));
        assert!((d.c - (-2.0 / PI)).abs() < 1e-15);
        assert_eq!(d.residual, 0.0);
    }

    #[test]
    fn nonvanishing_mass_and_positivity() {
        let d = solve_density_nonvanishing(&two_plus_sin(1.0), 4096).unwrap();
        let mass = periodic_integral(&d.p).unwrap();
        assert!((mass - 1.0).abs() < 1e-10, "mass = {mass}");
        assert!(d.min_p() > 0.0);
        assert!(d.residual < 1e-6 * 2.0 * d.max_p(), "residual = {}", d.residual);
    }

    #[test]
    fn nonvanishing_rejects_vanishing_coupling() {
        assert!(matches!(
            solve_density_nonvanishing(&sigma_sin(1.0, 1.0), 256),
            Err(Error::NotNonVanishing)
        ));
    }

    #[test]
    fn extreme_stiffness_reported_not_guessed() {
        // Scaling 2 + sin far down makes int 2 rho / f^2 enormous; the
        // periodicity/normalization system degenerates and the solver must
        // say so instead of returning noise.
        for sigma in [0.1, 0.05] {
            let m = two_plus_sin(1.0).with_sigma(sigma).unwrap();
            assert!(
                matches!(
                    solve_density_nonvanishing(&m, 4096),
                    Err(Error::IllConditioned { .. })
                ),
                "sigma = {sigma}"
            );
        }
    }

    #[test]
    fn vanishing_boundary_values() {
        let m = sigma_sin(1.0, 0.8);
        let d = solve_density_vanishing(&m, 4096).unwrap();
        let expected = -d.c / (2.0 * m.rho());
        for z in [0.0, PI] {
            let got = d.value_at(z);
            assert!(
                (got - expected).abs() < 1e-6 * d.max_p(),
                "p({z}) = {got}, expected {expected}"
            );
        }
        assert!(d.c < 0.0);
    }

    #[test]
    fn vanishing_small_noise_is_near_uniform() {
        let d = solve_density_vanishing(&sigma_sin(1.0, 0.3), 4096).unwrap();
        let u = 1.0 / TAU;
        let dev = d
            .p
            .iter()
            .map(|&p| (p - u).abs())
            .fold(0.0_f64, f64::max);
        assert!(dev / u < 0.05, "relative deviation = {}", dev / u);
    }

    #[test]
    fn vanishing_mass_positivity_residual() {
        for sigma in [0.1, 0.5, 1.5] {
            let m = sigma_sin(1.0, sigma);
            let d = solve_density_vanishing(&m, 4096).unwrap();
            let mass = periodic_integral(&d.p).unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "sigma = {sigma}, mass = {mass}");
            assert!(d.min_p() >= 0.0);
            assert!(
                d.residual < 1e-6 * 2.0 * m.rho() * d.max_p(),
                "sigma = {sigma}, residual = {}",
                d.residual
            );
        }
    }

    #[test]
    fn vanishing_rejects_tangential_zero() {
        let m =
            OscillatorModel::new(1.0, FourierFunction::new(1.0, vec![-1.0], vec![0.0]), 1.0)
                .unwrap();
        assert!(matches!(
            solve_density_vanishing(&m, 1024),
            Err(Error::NonTransversalZero { .. })
        ));
    }

    #[test]
    fn four_zero_coupling_solves() {
        // sin(2 phi): four transversal zeros, four intervals.
        let m = OscillatorModel::new(
            1.0,
            FourierFunction::new(0.0, vec![0.0, 0.0], vec![0.0, 1.0]),
            1.0,
        )
        .unwrap();
        let d = solve_density_vanishing(&m, 4096).unwrap();
        let mass = periodic_integral(&d.p).unwrap();
        assert!((mass - 1.0).abs() < 1e-8);
        let expected = -d.c / 2.0;
        for z in [0.0, PI / 2.0, PI, 3.0 * PI / 2.0] {
            assert!((d.value_at(z) - expected).abs() < 1e-6 * d.max_p());
        }
    }

    #[test]
    fn empirical_density_rejects_bad_times() {
        let m = two_plus_sin(1.0);
        assert!(matches!(
            empirical_density(&m, 0, 1.0, 2.0, 16, 1e-3),
            Err(Error::InvalidTimes(_))
        ));
        assert!(matches!(
            empirical_density(&m, 0, 10.0, 1.0, 16, 0.5),
            Err(Error::InvalidTimes(_))
        ));
    }

    #[test]
    fn empirical_density_deterministic_and_normalized() {
        let m = two_plus_sin(1.0);
        let a = empirical_density(&m, 7, 50.0, 5.0, 64, 1e-2).unwrap();
        let b = empirical_density(&m, 7, 50.0, 5.0, 64, 1e-2).unwrap();
        assert_eq!(a.counts, b.counts);
        let width = TAU / 64.0;
        let total: f64 = a.estimate.iter().map(|e| e * width).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solver_matches_empirical_histogram() {
        let m = two_plus_sin(1.0);
        let d = solve_density_nonvanishing(&m, 4096).unwrap();
        let e = empirical_density(&m, 0, 1100.0, 100.0, 128, 1e-3).unwrap();
        let l1 = l1_distance(&d, &e);
        assert!(l1 < 0.05, "l1 = {l1}");
    }

    #[test]
    fn uniform_density_fails_on_nonconstant_coupling() {
        // Forcing a uniform density onto 2 + sin with the best constant
        // leaves a residual far above the solver's, confirming the density
        // cannot be uniform when the coupling varies.
        let m = two_plus_sin(1.0);
        let grid = CircleGrid::new(1024).unwrap();
        let u = 1.0 / TAU;
        // Best C minimizes max |-(2 rho - f' f) u - C| over nodes.
        let vals: Vec<f64> = grid
            .nodes()
            .map(|p| -(2.0 * m.rho() - m.f1(p) * m.f(p)) * u)
            .collect();
        let lo = vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let hi = vals.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let best_c = 0.5 * (lo + hi);
        let mut d = DensityGrid {
            grid,
            p: vec![u; 1024],
            c: best_c,
            case: NoiseClass::NonVanishing,
            residual: 0.0,
        };
        let res = fp_residual(&mut d, &m);
        assert!(
            res > 1e-3 * 2.0 * m.rho() * u,
            "residual = {res} too small"
        );
    }

    #[test]
    fn grid_convergence_nonvanishing() {
        let m = two_plus_sin(1.0);
        let d1 = solve_density_nonvanishing(&m, 2048).unwrap();
        let d2 = solve_density_nonvanishing(&m, 4096).unwrap();
        let sup = (0..2048)
            .map(|j| (d1.p[j] - d2.p[2 * j]).abs())
            .fold(0.0_f64, f64::max);
        assert!(sup < 1e-6, "sup = {sup}");
    }
}
