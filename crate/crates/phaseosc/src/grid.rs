//! Uniform circle grid and periodic quadrature.
//!
//! On a uniform periodic grid the rectangle sum equals the trapezoid rule and
//! converges spectrally for smooth integrands, which keeps every module of the
//! pipeline on one shared discretization.

use crate::error::{Error, Result};
use std::f64::consts::TAU;

/// Uniform grid phi_j = 2 pi j / n, j = 0..n-1. The duplicate point at 2 pi
/// is never stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircleGrid {
    n: usize,
}

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::EmptyGrid);
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node spacing h = 2 pi / n.
    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.node(j))
    }

    /// Sample a function at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().map(f).collect()
    }
}

/// Integral over the full circle: h * sum(values). Trapezoid and rectangle
/// coincide on a periodic uniform grid.
pub fn periodic_integral(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::EmptyGrid);
    }
    let h = TAU / values.len() as f64;
    Ok(h * values.iter().sum::<f64>())
}

/// Cumulative trapezoid: F_0 = 0, F_j = integral from 0 to phi_j.
/// The virtual F_n (wrapping back to the start) equals `periodic_integral`.
pub fn cumulative_integral(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::EmptyGrid);
    }
    let h = TAU / values.len() as f64;
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    Ok(out)
}

/// Fourth-order cumulative integration of a coupled pair of running
/// integrals, where the second integrand may depend on the first integral:
///
///   u(phi) = int_0^phi g(s) ds,
///   v(phi) = int_0^phi q(s, u(s)) ds.
///
/// Classic RK4 on the system (u' = g, v' = q), two substeps per grid cell.
/// Both integrands are evaluated exactly at stage points, so the global error
/// is O(h^4). Returns (u, v) at the n grid nodes plus the wrap values
/// (u(2 pi), v(2 pi)) appended at index n.
pub fn cumulative_pair_rk4(
    grid: &CircleGrid,
    g: impl Fn(f64) -> f64,
    q: impl Fn(f64, f64) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = grid.len();
    let h = grid.spacing() / 2.0; // two substeps per cell
    let mut u = Vec::with_capacity(n + 1);
    let mut v = Vec::with_capacity(n + 1);
    let (mut cu, mut cv) = (0.0_f64, 0.0_f64);
    u.push(0.0);
    v.push(0.0);
    for j in 0..n {
        let x0 = grid.node(j);
        for sub in 0..2 {
            let x = x0 + h * sub as f64;
            // u' = g(x) has no state dependence; v' = q(x, u).
            let (k1u, k1v) = (g(x), q(x, cu));
            let (k2u, k2v) = (g(x + 0.5 * h), q(x + 0.5 * h, cu + 0.5 * h * k1u));
            let k3v = q(x + 0.5 * h, cu + 0.5 * h * k2u);
            let (k4u, k4v) = (g(x + h), q(x + h, cu + h * k2u));
            cu += h / 6.0 * (k1u + 4.0 * k2u + k4u);
            cv += h / 6.0 * (k1v + 2.0 * (k2v + k3v) + k4v);
        }
        u.push(cu);
        v.push(cv);
    }
    (u, v)
}

/// Circle metric d(x, y) = min(|x - y|, 2 pi - |x - y|); symmetric, <= pi.
pub fn circle_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).abs().rem_euclid(TAU);
    d.min(TAU - d)
}

/// Reduce to [0, 2 pi). `rem_euclid` can round up to exactly 2 pi for tiny
/// negative inputs, so that endpoint is folded back to 0.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        w - TAU
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierFunction;

    #[test]
    fn constant_integrates_to_tau() {
        let v = vec![1.0; 64];
        assert!((periodic_integral(&v).unwrap() - TAU).abs() < 1e-14);
    }

    #[test]
    fn sin_squared_integrates_to_pi() {
        let grid = CircleGrid::new(64).unwrap();
        let v = grid.sample(|p| p.sin().powi(2));
        assert!((periodic_integral(&v).unwrap() - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn exp_cos_matches_high_resolution_oracle() {
        // Oracle: self-integration at n = 2^16 pins the reference value,
        // which also matches 2 pi I_0(1).
        let fine = CircleGrid::new(1 << 16).unwrap();
        let oracle = periodic_integral(&fine.sample(|p| p.cos().exp())).unwrap();
        assert!(
            (oracle - 7.954_926_521_012_84).abs() < 1e-12,
            "oracle = {oracle}"
        );
        let grid = CircleGrid::new(256).unwrap();
        let got = periodic_integral(&grid.sample(|p| p.cos().exp())).unwrap();
        assert!((got - oracle).abs() < 1e-12, "got = {got}");
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(matches!(periodic_integral(&[1.0]), Err(Error::EmptyGrid)));
        assert!(matches!(cumulative_integral(&[]), Err(Error::EmptyGrid)));
        assert!(CircleGrid::new(1).is_err());
    }

    #[test]
    fn cumulative_of_ones_is_identity() {
        let grid = CircleGrid::new(128).unwrap();
        let f = cumulative_integral(&vec![1.0; 128]).unwrap();
        for (j, fj) in f.iter().enumerate() {
            assert!((fj - grid.node(j)).abs() < 1e-12);
        }
    }

    #[test]
    fn cumulative_of_cos_tracks_sin() {
        let grid = CircleGrid::new(256).unwrap();
        let f = cumulative_integral(&grid.sample(f64::cos)).unwrap();
        let max_err = f
            .iter()
            .enumerate()
            .map(|(j, fj)| (fj - grid.node(j).sin()).abs())
            .fold(0.0_f64, f64::max);
        assert!(max_err < 1e-3, "max_err = {max_err}");
    }

    #[test]
    fn cumulative_of_zeros_is_zero() {
        let f = cumulative_integral(&[0.0; 16]).unwrap();
        assert!(f.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn integral_of_exact_derivative_vanishes() {
        let g = FourierFunction::new(0.5, vec![1.0, -0.4, 0.05], vec![0.3, 0.0, 1.1]);
        let d = g.derivative();
        let grid = CircleGrid::new(512).unwrap();
        let total = periodic_integral(&grid.sample(|p| d.eval(p))).unwrap();
        assert!(total.abs() < 1e-12, "total = {total}");
    }

    #[test]
    fn doubling_changes_trig_integral_below_spectral_floor() {
        let g = FourierFunction::new(0.2, vec![0.9, -0.3, 0.0, 0.7], vec![0.1, 0.5, -0.2, 0.0]);
        let i1 = periodic_integral(&CircleGrid::new(64).unwrap().sample(|p| g.eval(p))).unwrap();
        let i2 = periodic_integral(&CircleGrid::new(128).unwrap().sample(|p| g.eval(p))).unwrap();
        assert!((i1 - i2).abs() < 1e-13);
    }

    #[test]
    fn rk4_pair_reproduces_smooth_antiderivatives() {
        let grid = CircleGrid::new(256).unwrap();
        // u = int cos = sin, v = int u = 1 - cos.
        let (u, v) = cumulative_pair_rk4(&grid, f64::cos, |_, uu| uu);
        for j in 0..grid.len() {
            let phi = grid.node(j);
            assert!((u[j] - phi.sin()).abs() < 1e-10);
            assert!((v[j] - (1.0 - phi.cos())).abs() < 1e-10);
        }
        assert!(u[grid.len()].abs() < 1e-10);
    }

    #[test]
    fn circle_distance_symmetric_and_bounded() {
        let cases = [(0.1, 6.2), (3.0, 0.5), (0.0, std::f64::consts::PI)];
        for (x, y) in cases {
            let d = circle_distance(x, y);
            assert!((d - circle_distance(y, x)).abs() < 1e-15);
            assert!(d <= std::f64::consts::PI + 1e-15);
        }
        assert!((circle_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn wrap_phase_stays_in_range() {
        for phi in [-1e-18, -0.1, 0.0, TAU, TAU + 0.1, -7.0 * TAU, 1e9] {
            let w = wrap_phase(phi);
            assert!((0.0..TAU).contains(&w), "phi = {phi}, w = {w}");
        }
    }
}
