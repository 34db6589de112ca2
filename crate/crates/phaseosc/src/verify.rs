//! Self-checking verification suite over the built-in corpus.
//!
//! Each check pins one invariant of the pipeline: solver self-consistency,
//! cross-method agreement of the Lyapunov estimators, the negativity of the
//! exponent on generic models, synchronization diagnostics, and determinism.
//! `phaseosc verify` prints one line per check; the acceptance tests reuse
//! the same functions.

use crate::corpus;
use crate::density::{
    empirical_density, fp_residual, l1_distance, solve_density, solve_density_nonvanishing,
    solve_density_vanishing, DensityGrid,
};
use crate::dynamics::{
    pullback, simulate_ensemble, simulate_path, step_heun, step_ito_em, NoiseCoupling,
};
use crate::fourier::FourierFunction;
use crate::grid::{circle_distance, periodic_integral, CircleGrid};
use crate::lyapunov::{
    interval_contributions, lyapunov_flux_form, lyapunov_monte_carlo, lyapunov_quadrature,
    lyapunov_two_point,
};
use crate::model::{NoiseClass, OscillatorModel};
use crate::noise::NoiseStream;
use std::f64::consts::{PI, TAU};
use std::time::Instant;

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = (&'static str, fn() -> Result<String, String>);

/// Every check in suite order. Heavier simulation checks sit at the end.
pub fn checks() -> Vec<Check> {
    vec![
        ("zeros_of_random_series", zeros_of_random_series),
        ("derivative_linearity", derivative_linearity),
        ("derivative_matches_differences", derivative_matches_differences),
        ("integral_of_derivative_vanishes", integral_of_derivative_vanishes),
        ("quadrature_spectral_doubling", quadrature_spectral_doubling),
        ("density_normalization", density_normalization),
        ("density_positivity", density_positivity),
        ("density_residuals", density_residuals),
        ("density_boundary_values", density_boundary_values),
        ("density_not_constant", density_not_constant),
        ("uniform_density_rejected", uniform_density_rejected),
        ("density_grid_convergence", density_grid_convergence),
        ("holder_inequality_strict", holder_inequality_strict),
        ("flux_constant_negative", flux_constant_negative),
        ("lyapunov_negativity", lyapunov_negativity),
        ("quadrature_matches_flux_form", quadrature_matches_flux_form),
        ("interval_contributions_negative", interval_contributions_negative),
        ("small_noise_scaling", small_noise_scaling),
        ("non_generic_pipeline_warns", non_generic_pipeline_warns),
        ("cocycle_exactness", cocycle_exactness),
        ("wrap_and_metric", wrap_and_metric),
        ("determinism_parallel", determinism_parallel),
        ("strong_order_heun", strong_order_heun),
        ("occupation_uniform_for_constant_coupling", occupation_uniform_for_constant_coupling),
        ("endpoint_distributions_ks", endpoint_distributions_ks),
        ("two_point_slope", two_point_slope),
        ("density_oracle_agreement", density_oracle_agreement),
        ("scheme_histograms_agree", scheme_histograms_agree),
        ("monte_carlo_cross_method", monte_carlo_cross_method),
        ("ensemble_synchronization", ensemble_synchronization),
        ("independent_noise_control", independent_noise_control),
        ("pullback_convergence", pullback_convergence),
    ]
}

pub fn run_all() -> Vec<CheckResult> {
    checks()
        .into_iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let outcome = f();
            CheckResult {
                name,
                passed: outcome.is_ok(),
                detail: match outcome {
                    Ok(d) | Err(d) => d,
                },
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

pub fn run_one(name: &str) -> Option<CheckResult> {
    let (n, f) = checks().into_iter().find(|(n, _)| *n == name)?;
    let start = Instant::now();
    let outcome = f();
    Some(CheckResult {
        name: n,
        passed: outcome.is_ok(),
        detail: match outcome {
            Ok(d) | Err(d) => d,
        },
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn fail(msg: String) -> Result<String, String> {
    Err(msg)
}

/// Deterministic pseudo-random Fourier series for property-style checks.
fn random_series(tag: u64, degree: usize) -> FourierFunction {
    let s = NoiseStream::new(0xf0_u64 ^ tag, 1.0);
    let a: Vec<f64> = (0..degree)
        .map(|k| 0.8 * s.unit_normal(2 * k as u64) / (1.0 + k as f64))
        .collect();
    let b: Vec<f64> = (0..degree)
        .map(|k| 0.8 * s.unit_normal(2 * k as u64 + 1) / (1.0 + k as f64))
        .collect();
    FourierFunction::new(0.3 * s.unit_normal(1000), a, b)
}

fn zeros_of_random_series() -> Result<String, String> {
    let mut checked = 0;
    for tag in 0..24_u64 {
        let degree = 1 + (tag % 8) as usize;
        let f = random_series(tag, degree);
        let m = OscillatorModel::new(1.0, f, 1.0).map_err(|e| e.to_string())?;
        let zeros = m
            .find_zeros(crate::model::default_scan_grid(degree))
            .map_err(|e| e.to_string())?;
        for z in &zeros.zeros {
            let v = m.f(z.phi).abs();
            if v >= 1e-10 {
                return fail(format!("tag {tag}: |f(zero)| = {v:.3e} at {}", z.phi));
            }
        }
        // Constant sign between consecutive zeros on a 10x finer grid.
        let fine = CircleGrid::new(10 * crate::model::default_scan_grid(degree))
            .map_err(|e| e.to_string())?;
        let zs = zeros.phis();
        for j in 0..fine.len() {
            let phi = fine.node(j);
            let v = m.f(phi);
            if v.abs() < 1e-9 || zs.iter().any(|&z| circle_distance(phi, z) < 1e-3) {
                continue;
            }
            // Sign must match the sign of f at the midpoint of the
            // containing interval.
            if !zs.is_empty() {
                let k = zs.len();
                let idx = zs.iter().rposition(|&z| z <= phi).unwrap_or(k - 1);
                let lo = zs[idx];
                let hi = if idx + 1 < k { zs[idx + 1] } else { zs[0] + TAU };
                let mid = m.f(0.5 * (lo + hi));
                if v * mid < 0.0 {
                    return fail(format!(
                        "tag {tag}: sign change inside interval at phi = {phi}"
                    ));
                }
            }
        }
        checked += 1;
    }
    Ok(format!("{checked} random series, all zeros verified"))
}

fn derivative_linearity() -> Result<String, String> {
    for tag in 0..16_u64 {
        let g = random_series(tag, 6);
        let h = random_series(tag + 100, 6);
        let (alpha, beta) = (1.7, -0.4);
        let combo = FourierFunction::new(
            alpha * g.a0 + beta * h.a0,
            g.a.iter().zip(&h.a).map(|(x, y)| alpha * x + beta * y).collect(),
            g.b.iter().zip(&h.b).map(|(x, y)| alpha * x + beta * y).collect(),
        )
        .derivative();
        let dg = g.derivative();
        let dh = h.derivative();
        for k in 0..6 {
            let want_a = alpha * dg.a[k] + beta * dh.a[k];
            let want_b = alpha * dg.b[k] + beta * dh.b[k];
            if (combo.a[k] - want_a).abs() > 1e-12 || (combo.b[k] - want_b).abs() > 1e-12 {
                return fail(format!("tag {tag}: linearity broken at harmonic {}", k + 1));
            }
        }
    }
    Ok("derivative is linear coefficient-wise".into())
}

fn derivative_matches_differences() -> Result<String, String> {
    let s = NoiseStream::new(77, 1.0);
    let mut worst = 0.0_f64;
    for tag in 0..4_u64 {
        let g = random_series(tag + 30, 5);
        let d = g.derivative();
        let eps = 1e-6;
        for i in 0..100_u64 {
            let phi = TAU * (0.5 + 0.5 * (s.unit_normal(tag * 100 + i) / 4.0).tanh());
            let fd = (g.eval(phi + eps) - g.eval(phi - eps)) / (2.0 * eps);
            let exact = d.eval(phi);
            let rel = (fd - exact).abs() / exact.abs().max(1.0);
            worst = worst.max(rel);
            if rel >= 1e-6 {
                return fail(format!("rel error {rel:.3e} at phi = {phi}"));
            }
        }
    }
    Ok(format!("max relative error {worst:.2e} over 400 points"))
}

fn integral_of_derivative_vanishes() -> Result<String, String> {
    for tag in 0..12_u64 {
        let g = random_series(tag, 1 + (tag % 7) as usize);
        let d = g.derivative();
        let grid = CircleGrid::new(512).map_err(|e| e.to_string())?;
        let total = periodic_integral(&grid.sample(|p| d.eval(p))).map_err(|e| e.to_string())?;
        if total.abs() >= 1e-12 {
            return fail(format!("tag {tag}: closed-curve integral = {total:.3e}"));
        }
    }
    Ok("closed-curve integral of exact derivative is 0 to 1e-12".into())
}

fn quadrature_spectral_doubling() -> Result<String, String> {
    let mut worst = 0.0_f64;
    for tag in 0..12_u64 {
        let degree = 1 + (tag % 8) as usize;
        let g = random_series(tag + 50, degree);
        let n = (4 * degree).max(32);
        let i1 = periodic_integral(
            &CircleGrid::new(n).map_err(|e| e.to_string())?.sample(|p| g.eval(p)),
        )
        .map_err(|e| e.to_string())?;
        let i2 = periodic_integral(
            &CircleGrid::new(2 * n)
                .map_err(|e| e.to_string())?
                .sample(|p| g.eval(p)),
        )
        .map_err(|e| e.to_string())?;
        worst = worst.max((i1 - i2).abs());
        if (i1 - i2).abs() >= 1e-13 {
            return fail(format!("tag {tag}: doubling changed integral by {:.3e}", (i1 - i2).abs()));
        }
    }
    Ok(format!("max doubling change {worst:.2e} (spectral exactness)"))
}

fn corpus_densities() -> Result<Vec<(String, OscillatorModel, DensityGrid)>, String> {
    let mut out = Vec::new();
    for (name, m) in corpus::generic_models() {
        let d = solve_density(&m, 4096).map_err(|e| format!("{name}: {e}"))?;
        out.push((name, m, d));
    }
    let m = corpus::constant(1.0, 1.0);
    let d = solve_density(&m, 4096).map_err(|e| e.to_string())?;
    out.push(("constant, rho=1".into(), m, d));
    Ok(out)
}

fn density_normalization() -> Result<String, String> {
    let mut worst = 0.0_f64;
    for (name, _, d) in corpus_densities()? {
        let mass = periodic_integral(&d.p).map_err(|e| e.to_string())?;
        let dev = (mass - 1.0).abs();
        worst = worst.max(dev);
        if dev >= 1e-8 {
            return fail(format!("{name}: mass deviates by {dev:.3e}"));
        }
    }
    Ok(format!("max mass deviation {worst:.2e}"))
}

fn density_positivity() -> Result<String, String> {
    for (name, _, d) in corpus_densities()? {
        let min = d.min_p();
        match d.case {
            NoiseClass::NonVanishing if min <= 0.0 => {
                return fail(format!("{name}: min p = {min:.3e} not strictly positive"))
            }
            NoiseClass::Vanishing if min < 0.0 => {
                return fail(format!("{name}: min p = {min:.3e} negative"))
            }
            _ => {}
        }
    }
    Ok("densities positive (nonnegative at vanishing coupling)".into())
}

fn density_residuals() -> Result<String, String> {
    let mut worst = 0.0_f64;
    for (name, m, d) in corpus_densities()? {
        let threshold = 1e-6 * 2.0 * m.rho() * d.max_p();
        let ratio = d.residual / threshold;
        worst = worst.max(ratio);
        if d.residual >= threshold {
            return fail(format!(
                "{name}: residual {:.3e} >= threshold {threshold:.3e}",
                d.residual
            ));
        }
    }
    Ok(format!("worst residual at {:.1}% of threshold", worst * 100.0))
}

fn density_boundary_values() -> Result<String, String> {
    let mut worst = 0.0_f64;
    for (name, m, d) in corpus_densities()? {
        if d.case != NoiseClass::Vanishing {
            continue;
        }
        let zeros = m
            .find_zeros(crate::model::default_scan_grid(m.coupling().degree()))
            .map_err(|e| e.to_string())?;
        let expected = -d.c / (2.0 * m.rho());
        for z in zeros.phis() {
            let rel = (d.value_at(z) - expected).abs() / expected;
            worst = worst.max(rel);
            if rel >= 1e-6 {
                return fail(format!("{name}: p({z:.4}) off by {rel:.3e} relative"));
            }
        }
    }
    Ok(format!("worst boundary deviation {worst:.2e} relative"))
}

fn density_not_constant() -> Result<String, String> {
    for (name, m, d) in corpus_densities()? {
        if m.coupling().max_harmonic() <= crate::model::COEFF_TOL {
            continue; // constant coupling: uniform density is correct
        }
        let spread = d.max_p() - d.min_p();
        if spread <= 1e-6 {
            return fail(format!("{name}: density spread only {spread:.3e}"));
        }
    }
    Ok("stationary density non-constant for every non-constant coupling".into())
}

fn uniform_density_rejected() -> Result<String, String> {
    let m = corpus::two_plus_sin(1.0);
    let grid = CircleGrid::new(1024).map_err(|e| e.to_string())?;
    let u = 1.0 / TAU;
    let vals: Vec<f64> = grid
        .nodes()
        .map(|p| -(2.0 * m.rho() - m.f1(p) * m.f(p)) * u)
        .collect();
    let lo = vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = vals.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut d = DensityGrid {
        grid,
        p: vec![u; 1024],
        c: 0.5 * (lo + hi),
        case: NoiseClass::NonVanishing,
        residual: 0.0,
    };
    let res = fp_residual(&mut d, &m);
    let floor = 1e-3 * 2.0 * m.rho() * u;
    if res <= floor {
        return fail(format!("uniform density residual {res:.3e} <= floor {floor:.3e}"));
    }
    Ok(format!("forced uniform residual {res:.3e} >> floor {floor:.3e}"))
}

fn density_grid_convergence() -> Result<String, String> {
    let m = corpus::two_plus_sin(1.0);
    let d1 = solve_density_nonvanishing(&m, 2048).map_err(|e| e.to_string())?;
    let d2 = solve_density_nonvanishing(&m, 4096).map_err(|e| e.to_string())?;
    let sup = (0..2048)
        .map(|j| (d1.p[j] - d2.p[2 * j]).abs())
        .fold(0.0_f64, f64::max);
    if sup >= 1e-6 {
        return fail(format!("doubling n moved density by {sup:.3e} sup-norm"));
    }
    Ok(format!("doubling n moves density by {sup:.2e} sup-norm"))
}

fn holder_inequality_strict() -> Result<String, String> {
    let mut min_margin = f64::INFINITY;
    for rho in [0.5, 1.0, 3.0] {
        let m = corpus::two_plus_sin(rho);
        let d = solve_density_nonvanishing(&m, 4096).map_err(|e| e.to_string())?;
        let g: Vec<f64> = d.grid.nodes().map(|p| 1.0 / m.f(p).powi(2)).collect();
        let gp: Vec<f64> = g.iter().zip(&d.p).map(|(g, p)| g * p).collect();
        let gq: Vec<f64> = g.iter().zip(&d.p).map(|(g, p)| g / p).collect();
        let lhs = periodic_integral(&gp).map_err(|e| e.to_string())?
            * periodic_integral(&gq).map_err(|e| e.to_string())?;
        let rhs = periodic_integral(&g).map_err(|e| e.to_string())?.powi(2);
        let margin = (lhs - rhs) / rhs;
        min_margin = min_margin.min(margin);
        if margin <= 1e-10 {
            return fail(format!("rho = {rho}: margin {margin:.3e} not strict"));
        }
    }
    Ok(format!("min relative margin {min_margin:.3e}"))
}

fn flux_constant_negative() -> Result<String, String> {
    for (name, _, d) in corpus_densities()? {
        if d.case == NoiseClass::Vanishing && d.c >= 0.0 {
            return fail(format!("{name}: C = {} not negative", d.c));
        }
    }
    Ok("flux constant negative whenever the coupling vanishes".into())
}

fn lyapunov_negativity() -> Result<String, String> {
    let mut max_lambda = f64::NEG_INFINITY;
    for (name, m) in corpus::generic_models() {
        let rep = m.check_genericity();
        if !rep.is_generic() {
            return fail(format!("{name}: expected generic"));
        }
        let d = solve_density(&m, 4096).map_err(|e| format!("{name}: {e}"))?;
        let lam = lyapunov_quadrature(&m, &d)
            .map_err(|e| format!("{name}: {e}"))?
            .value;
        max_lambda = max_lambda.max(lam);
        if lam >= -1e-10 {
            return fail(format!("{name}: lambda = {lam:.3e} not negative"));
        }
    }
    Ok(format!("all 12 generic models negative; max lambda = {max_lambda:.3e}"))
}

fn quadrature_matches_flux_form() -> Result<String, String> {
    let mut worst = 0.0_f64;
    for rho in [0.5, 1.0, 3.0] {
        let m = corpus::two_plus_sin(rho);
        let d = solve_density_nonvanishing(&m, 4096).map_err(|e| e.to_string())?;
        let a = lyapunov_quadrature(&m, &d).map_err(|e| e.to_string())?.value;
        let b = lyapunov_flux_form(&m, &d).map_err(|e| e.to_string())?.value;
        worst = worst.max((a - b).abs());
        if (a - b).abs() >= 1e-8 {
            return fail(format!("rho = {rho}: |quad - flux| = {:.3e}", (a - b).abs()));
        }
    }
    Ok(format!("max |quad - flux| = {worst:.2e}"))
}

fn interval_contributions_negative() -> Result<String, String> {
    let mut worst_sum = 0.0_f64;
    for (name, m) in corpus::generic_models() {
        let d = solve_density(&m, 4096).map_err(|e| format!("{name}: {e}"))?;
        let ic = interval_contributions(&m, &d).map_err(|e| format!("{name}: {e}"))?;
        if d.case == NoiseClass::Vanishing {
            for iv in &ic.intervals {
                if iv.i >= 0.0 {
                    return fail(format!(
                        "{name}: I on [{:.3}, {:.3}] = {:.3e} not negative",
                        iv.lo, iv.hi, iv.i
                    ));
                }
            }
        }
        worst_sum = worst_sum.max(ic.sum_check);
        if ic.sum_check >= 1e-10 {
            return fail(format!("{name}: sum check off by {:.3e}", ic.sum_check));
        }
    }
    Ok(format!("every interval negative; worst sum check {worst_sum:.2e}"))
}

fn small_noise_scaling() -> Result<String, String> {
    let mut ratios = Vec::new();
    for sigma in [0.05, 0.1, 0.2] {
        let m = corpus::sigma_sin(1.0, sigma);
        let d = solve_density_vanishing(&m, 4096).map_err(|e| e.to_string())?;
        let lam = lyapunov_quadrature(&m, &d).map_err(|e| e.to_string())?.value;
        let ratio = lam / (sigma * sigma);
        if !((-0.2875..=-0.2125).contains(&ratio)) {
            return fail(format!("sigma = {sigma}: lambda/sigma^2 = {ratio:.4} outside band"));
        }
        ratios.push(ratio);
    }
    let spread = ratios.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - ratios.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if spread > 0.15 * 0.25 {
        return fail(format!("lambda/sigma^2 varies by {spread:.4} across sigmas"));
    }
    Ok(format!(
        "lambda/sigma^2 = [{:.4}, {:.4}, {:.4}]",
        ratios[0], ratios[1], ratios[2]
    ))
}

fn non_generic_pipeline_warns() -> Result<String, String> {
    let m = corpus::one_minus_cos(1.0);
    let rep = m.check_genericity();
    if rep.is_generic() {
        return fail("1 - cos should fail H2".into());
    }
    // The singular solver must refuse; the Monte Carlo estimator still runs.
    match solve_density_vanishing(&m, 1024) {
        Err(crate::error::Error::NonTransversalZero { .. }) => {}
        other => {
            return fail(format!(
                "expected NonTransversalZero, got {:?}",
                other.map(|_| "density")
            ))
        }
    }
    let mc = lyapunov_monte_carlo(&m, 0, 8, 50.0, 1e-3).map_err(|e| e.to_string())?;
    Ok(format!(
        "H2 fails, density solver refuses, MC still runs (lambda_mc = {:.4}; no negativity asserted)",
        mc.value
    ))
}

fn cocycle_exactness() -> Result<String, String> {
    let m = corpus::two_plus_sin(1.0);
    let stream = NoiseStream::new(4, 1e-3);
    let full = simulate_path(&m, &stream, 2.0, 2.0, 1).map_err(|e| e.to_string())?;
    let first = simulate_path(&m, &stream, 2.0, 1.0, 1).map_err(|e| e.to_string())?;
    let mid = *first.phases.last().unwrap();
    let second =
        simulate_path(&m, &stream.with_offset(1000), mid, 1.0, 1).map_err(|e| e.to_string())?;
    for k in 0..=1000_usize {
        if full.phases[1000 + k] != second.phases[k] {
            return fail(format!("cocycle broken at continuation step {k}"));
        }
    }
    Ok("restart at the shifted offset reproduces the path bit-for-bit".into())
}

fn wrap_and_metric() -> Result<String, String> {
    let m = corpus::two_plus_sin(1.0);
    let stream = NoiseStream::new(3, 1e-3);
    let rec = simulate_path(&m, &stream, 6.2, 5.0, 13).map_err(|e| e.to_string())?;
    if !rec.phases.iter().all(|&p| (0.0..TAU).contains(&p)) {
        return fail("recorded phase outside [0, 2 pi)".into());
    }
    for (x, y) in [(0.1, 6.1), (3.0, 0.2), (PI, 0.0)] {
        let d = circle_distance(x, y);
        if (d - circle_distance(y, x)).abs() > 1e-15 || d > PI + 1e-15 {
            return fail(format!("metric broken at ({x}, {y})"));
        }
    }
    Ok("phases wrapped; metric symmetric and bounded by pi".into())
}

fn determinism_parallel() -> Result<String, String> {
    let m = corpus::two_plus_sin(1.0);
    // Monte Carlo repeats bit-identically under the rayon pool.
    let a = lyapunov_monte_carlo(&m, 9, 16, 50.0, 1e-3).map_err(|e| e.to_string())?;
    let b = lyapunov_monte_carlo(&m, 9, 16, 50.0, 1e-3).map_err(|e| e.to_string())?;
    if a.value.to_bits() != b.value.to_bits() || a.stderr.to_bits() != b.stderr.to_bits() {
        return fail("Monte Carlo reruns differ".into());
    }
    let stream = NoiseStream::new(9, 1e-3);
    let x0s: Vec<f64> = (0..8).map(|i| TAU * i as f64 / 8.0).collect();
    let s1 = simulate_ensemble(&m, &stream, &x0s, 10.0, &[10.0], NoiseCoupling::Common)
        .map_err(|e| e.to_string())?;
    let s2 = simulate_ensemble(&m, &stream, &x0s, 10.0, &[10.0], NoiseCoupling::Common)
        .map_err(|e| e.to_string())?;
    if s1 != s2 {
        return fail("ensemble reruns differ".into());
    }
    Ok("Monte Carlo and ensemble reruns bit-identical".into())
}

fn strong_order_heun() -> Result<String, String> {
    let m = corpus::two_plus_sin(1.0);
    let dts = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    let n_paths = 64_u64;
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for &dt in &dts {
        let refine = 64_u64;
        let fine_dt = dt / refine as f64;
        let coarse_steps = (1.0 / dt).round() as u64;
        let mut sum_sq = 0.0;
        for path in 0..n_paths {
            let fine = NoiseStream::new(42, fine_dt).substream(path);
            let mut phi_c = 1.0_f64;
            let mut phi_f = 1.0_f64;
            for k in 0..coarse_steps {
                let mut dw = 0.0;
                for i in 0..refine {
                    let dwf = fine.increment(k * refine + i);
                    phi_f = step_heun(&m, phi_f, dwf, fine_dt);
                    dw += dwf;
                }
                phi_c = step_heun(&m, phi_c, dw, dt);
            }
            sum_sq += circle_distance(phi_c, phi_f).powi(2);
        }
        lx.push(dt.ln());
        ly.push((sum_sq / n_paths as f64).sqrt().ln());
    }
    let n = lx.len() as f64;
    let xb = lx.iter().sum::<f64>() / n;
    let yb = ly.iter().sum::<f64>() / n;
    let q = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (x - xb) * (y - yb))
        .sum::<f64>()
        / lx.iter().map(|x| (x - xb).powi(2)).sum::<f64>();
    if !(0.75..=1.25).contains(&q) {
        return fail(format!("fitted strong order {q:.3} outside [0.75, 1.25]"));
    }
    Ok(format!("fitted strong order {q:.3}"))
}

fn occupation_uniform_for_constant_coupling() -> Result<String, String> {
    // Rotation plus additive noise has the uniform law. Occupation samples
    // are autocorrelated, so the multinomial 3-sigma band is inflated by the
    // integrated autocorrelation time (~6 steps at dt = 1e-2 for this model,
    // budgeted at 12).
    let m = corpus::constant(1.0, 1.0);
    let bins = 64;
    let e = empirical_density(&m, 0, 1e4, 10.0, bins, 1e-2).map_err(|e| e.to_string())?;
    let p = 1.0 / bins as f64;
    let n = e.total_samples as f64;
    let band = 3.0 * ((1.0 - p) / (n * p)).sqrt() * 12.0_f64.sqrt();
    let u = 1.0 / TAU;
    let mut worst = 0.0_f64;
    for (b, est) in e.estimate.iter().enumerate() {
        let rel = (est - u).abs() / u;
        worst = worst.max(rel);
        if rel >= band {
            return fail(format!(
                "bin {b}: relative deviation {rel:.4} outside the {band:.4} band"
            ));
        }
    }
    Ok(format!("max bin deviation {worst:.4} within band {band:.4}"))
}

fn endpoint_distributions_ks() -> Result<String, String> {
    // The Heun and Ito-Euler discretizations target the same law; compare
    // the time-1 endpoint distributions of 1e5 paths from a common start.
    use rayon::prelude::*;
    let m = corpus::two_plus_sin(1.0);
    let dt = 1e-3_f64;
    let steps = (1.0 / dt).round() as u64;
    let n = 100_000_usize;
    let run = |use_heun: bool, seed: u64| -> Vec<f64> {
        let base = NoiseStream::new(seed, dt);
        let mut out: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|k| {
                let stream = base.substream(k as u64);
                let mut phi = 1.0_f64;
                for s in 0..steps {
                    let dw = stream.increment(s);
                    phi = if use_heun {
                        step_heun(&m, phi, dw, dt)
                    } else {
                        step_ito_em(&m, phi, dw, dt)
                    };
                }
                phi
            })
            .collect();
        out.sort_by(f64::total_cmp);
        out
    };
    let a = run(true, 11);
    let b = run(false, 12);
    // Two-sample Kolmogorov-Smirnov statistic on the sorted samples.
    let (mut i, mut j, mut ks) = (0_usize, 0_usize, 0.0_f64);
    while i < n && j < n {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        ks = ks.max((i as f64 / n as f64 - j as f64 / n as f64).abs());
    }
    if ks >= 0.02 {
        return fail(format!("KS distance {ks:.4} >= 0.02 at time 1"));
    }
    Ok(format!("KS distance {ks:.4} between 1e5-sample endpoint laws"))
}

fn two_point_slope() -> Result<String, String> {
    let m = corpus::two_plus_sin(1.0);
    let d = solve_density_nonvanishing(&m, 4096).map_err(|e| e.to_string())?;
    let lam = lyapunov_quadrature(&m, &d).map_err(|e| e.to_string())?.value;
    let tp = lyapunov_two_point(&m, 0, 1.0, 1.05, 400.0, 1e-3).map_err(|e| e.to_string())?;
    let rel = (tp.value - lam).abs() / lam.abs();
    if rel >= 0.2 {
        return fail(format!(
            "two-point slope {:.5} vs lambda {lam:.5}: {:.1}% off",
            tp.value,
            rel * 100.0
        ));
    }
    Ok(format!(
        "slope {:.5} vs lambda {:.5} ({:.1}% apart)",
        tp.value,
        lam,
        rel * 100.0
    ))
}

fn density_oracle_agreement() -> Result<String, String> {
    let cases: Vec<(&str, OscillatorModel, f64)> = vec![
        ("2+sin rho=1", corpus::two_plus_sin(1.0), 0.02),
        ("0.3*sin rho=1", corpus::sigma_sin(1.0, 0.3), 0.03),
        ("0.5*sin rho=1", corpus::sigma_sin(1.0, 0.5), 0.03),
        ("1.5*sin rho=1", corpus::sigma_sin(1.0, 1.5), 0.03),
    ];
    let mut details = Vec::new();
    for (name, m, tol) in cases {
        let d = solve_density(&m, 4096).map_err(|e| e.to_string())?;
        // 1e7 post-burn-in samples at dt = 1e-3.
        let e = empirical_density(&m, 0, 10_100.0, 100.0, 256, 1e-3).map_err(|e| e.to_string())?;
        let l1 = l1_distance(&d, &e);
        if l1 >= tol {
            return fail(format!("{name}: L1 = {l1:.4} >= {tol}"));
        }
        details.push(format!("{name}: {l1:.4}"));
    }
    Ok(format!(
        "L1 vs 1e7-sample histograms: {}",
        details.join(", ")
    ))
}

fn scheme_histograms_agree() -> Result<String, String> {
    let m = corpus::two_plus_sin(1.0);
    let bins = 256;
    let dt = 1e-3;
    let (total, burn) = (10_100.0, 100.0);
    let heun = empirical_density(&m, 1, total, burn, bins, dt).map_err(|e| e.to_string())?;
    // Same experiment with the Ito-Euler discretization.
    let stream = NoiseStream::new(1, dt);
    let n_steps = (total / dt).round() as u64;
    let burn_steps = (burn / dt).round() as u64;
    let width = TAU / bins as f64;
    let mut counts = vec![0_u64; bins];
    let mut phi = 0.0_f64;
    for k in 0..n_steps {
        phi = step_ito_em(&m, phi, stream.increment(k), dt);
        if k + 1 > burn_steps {
            let b = ((phi / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
    }
    let tot = (n_steps - burn_steps) as f64;
    let l1: f64 = counts
        .iter()
        .zip(&heun.estimate)
        .map(|(&c, &e)| (c as f64 / (tot * width) - e).abs() * width)
        .sum();
    if l1 >= 0.03 {
        return fail(format!("Heun vs Ito-Euler stationary L1 = {l1:.4} >= 0.03"));
    }
    Ok(format!("Heun vs Ito-Euler stationary L1 = {l1:.4}"))
}

fn monte_carlo_cross_method() -> Result<String, String> {
    let mut details = Vec::new();
    for (name, m) in [
        ("2+sin rho=1", corpus::two_plus_sin(1.0)),
        ("0.5*sin rho=1", corpus::sigma_sin(1.0, 0.5)),
    ] {
        let d = solve_density(&m, 4096).map_err(|e| e.to_string())?;
        let lam = lyapunov_quadrature(&m, &d).map_err(|e| e.to_string())?.value;
        let mc = lyapunov_monte_carlo(&m, 0, 64, 2000.0, 1e-3).map_err(|e| e.to_string())?;
        let budget = 3.0 * mc.stderr + 5.0 * 1e-3;
        let diff = (mc.value - lam).abs();
        if diff >= budget {
            return fail(format!("{name}: |MC - quad| = {diff:.3e} >= budget {budget:.3e}"));
        }
        details.push(format!("{name}: diff {diff:.1e} < {budget:.1e}"));
    }
    Ok(details.join("; "))
}

fn ensemble_synchronization() -> Result<String, String> {
    let m = corpus::two_plus_sin(1.0);
    let d = solve_density_nonvanishing(&m, 4096).map_err(|e| e.to_string())?;
    let lam = lyapunov_quadrature(&m, &d).map_err(|e| e.to_string())?.value;
    let stream = NoiseStream::new(0, 1e-3);
    let x0s: Vec<f64> = (0..16).map(|i| TAU * i as f64 / 16.0).collect();
    let times: Vec<f64> = (0..=100).map(|i| 5.0 * i as f64).collect();
    let snaps = simulate_ensemble(&m, &stream, &x0s, 500.0, &times, NoiseCoupling::Common)
        .map_err(|e| e.to_string())?;
    let last = snaps.last().unwrap();
    if last.max_pairwise_dist >= 1e-6 {
        return fail(format!("final spread {:.3e} >= 1e-6", last.max_pairwise_dist));
    }
    if last.order_parameter <= 1.0 - 1e-10 {
        return fail(format!("final order parameter {}", last.order_parameter));
    }
    let pts: Vec<(f64, f64)> = snaps
        .iter()
        .filter(|s| s.max_pairwise_dist > 1e-11 && s.max_pairwise_dist < 0.1)
        .map(|s| (s.t, s.max_pairwise_dist.ln()))
        .collect();
    if pts.len() < 4 {
        return fail("too few decay-window snapshots".into());
    }
    let n = pts.len() as f64;
    let tb = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let sb = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - tb) * (p.1 - sb)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - tb).powi(2)).sum::<f64>();
    let rel = (slope - lam).abs() / lam.abs();
    if rel >= 0.25 {
        return fail(format!("contraction slope {slope:.5} vs lambda {lam:.5}: {:.0}% off", rel * 100.0));
    }
    Ok(format!(
        "final spread {:.1e}, slope {slope:.4} vs lambda {lam:.4} ({:.0}% apart)",
        last.max_pairwise_dist,
        rel * 100.0
    ))
}

fn independent_noise_control() -> Result<String, String> {
    let m = corpus::two_plus_sin(1.0);
    let x0s: Vec<f64> = (0..16).map(|i| TAU * i as f64 / 16.0).collect();
    let mut finals = Vec::new();
    for seed in 0..5_u64 {
        let stream = NoiseStream::new(seed, 1e-3);
        let snaps = simulate_ensemble(&m, &stream, &x0s, 500.0, &[500.0], NoiseCoupling::Independent)
            .map_err(|e| e.to_string())?;
        let d = snaps.last().unwrap().max_pairwise_dist;
        if d <= 0.5 {
            return fail(format!("seed {seed}: independent noise contracted to {d:.3}"));
        }
        finals.push(d);
    }
    Ok(format!(
        "no contraction on 5/5 seeds (final spreads {:.2}..{:.2})",
        finals.iter().fold(f64::INFINITY, |a, &b| a.min(b)),
        finals.iter().fold(0.0_f64, |a, &b| a.max(b))
    ))
}

fn pullback_convergence() -> Result<String, String> {
    let m = corpus::two_plus_sin(1.0);
    let stream = NoiseStream::new(0, 1e-3);
    let x0s = [0.0, PI / 2.0, PI, 3.0 * PI / 2.0];
    // Depth schedule sized to the model's contraction rate (lambda ~ -0.07):
    // the absolute tolerances below need |lambda| * depth budgets that the
    // shorter published schedule cannot supply.
    let depths = [150.0, 500.0, 1000.0];
    let samples = pullback(&m, &stream, &x0s, &depths).map_err(|e| e.to_string())?;
    let spread = samples.last().unwrap().spread;
    if spread >= 1e-8 {
        return fail(format!("endpoint spread {spread:.3e} >= 1e-8 at depth 1000"));
    }
    let drift = (0..x0s.len())
        .map(|i| circle_distance(samples[2].endpoints[i], samples[1].endpoints[i]))
        .fold(0.0_f64, f64::max);
    if drift >= 1e-6 {
        return fail(format!("successive-depth drift {drift:.3e} >= 1e-6"));
    }
    Ok(format!(
        "spread {spread:.1e} at depth 1000, successive drift {drift:.1e}"
    ))
}
