//! Property tests for the series algebra, the quadrature, and the circle
//! utilities.

use phaseosc::fourier::FourierFunction;
use phaseosc::grid::{
    circle_distance, cumulative_integral, periodic_integral, wrap_phase, CircleGrid,
};
use phaseosc::model::OscillatorModel;
use proptest::prelude::*;

fn coeffs(max_degree: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0_f64, 1..=max_degree)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_is_linear(a in coeffs(6), b in coeffs(6), alpha in -3.0..3.0_f64, beta in -3.0..3.0_f64) {
        let k = a.len().min(b.len());
        let g = FourierFunction::new(0.4, a[..k].to_vec(), b[..k].to_vec());
        let h = FourierFunction::new(-0.2, b[..k].to_vec(), a[..k].to_vec());
        let combo = FourierFunction::new(
            alpha * g.a0 + beta * h.a0,
            g.a.iter().zip(&h.a).map(|(x, y)| alpha * x + beta * y).collect(),
            g.b.iter().zip(&h.b).map(|(x, y)| alpha * x + beta * y).collect(),
        ).derivative();
        let dg = g.derivative();
        let dh = h.derivative();
        for i in 0..k {
            prop_assert!((combo.a[i] - (alpha * dg.a[i] + beta * dh.a[i])).abs() < 1e-9);
            prop_assert!((combo.b[i] - (alpha * dg.b[i] + beta * dh.b[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn derivative_matches_central_differences(a in coeffs(5), b in coeffs(5), phi in 0.0..std::f64::consts::TAU) {
        let k = a.len().min(b.len());
        let g = FourierFunction::new(0.1, a[..k].to_vec(), b[..k].to_vec());
        let d = g.derivative();
        let eps = 1e-6;
        let fd = (g.eval(phi + eps) - g.eval(phi - eps)) / (2.0 * eps);
        let rel = (fd - d.eval(phi)).abs() / d.eval(phi).abs().max(1.0);
        prop_assert!(rel < 1e-6, "rel = {rel}");
    }

    #[test]
    fn closed_curve_integral_of_derivative_vanishes(a in coeffs(8), b in coeffs(8)) {
        let k = a.len().min(b.len());
        let g = FourierFunction::new(0.0, a[..k].to_vec(), b[..k].to_vec());
        let grid = CircleGrid::new(256).unwrap();
        let d = g.derivative();
        let total = periodic_integral(&grid.sample(|p| d.eval(p))).unwrap();
        prop_assert!(total.abs() < 1e-11, "total = {total}");
    }

    #[test]
    fn cumulative_wrap_equals_periodic_integral(vals in prop::collection::vec(-5.0..5.0_f64, 8..200)) {
        let cum = cumulative_integral(&vals).unwrap();
        let h = std::f64::consts::TAU / vals.len() as f64;
        let wrap = cum.last().unwrap() + 0.5 * h * (vals[vals.len() - 1] + vals[0]);
        let total = periodic_integral(&vals).unwrap();
        prop_assert!((wrap - total).abs() < 1e-10 * (1.0 + total.abs()));
    }

    #[test]
    fn wrap_phase_lands_in_range(phi in -1e6..1e6_f64) {
        let w = wrap_phase(phi);
        prop_assert!((0.0..std::f64::consts::TAU).contains(&w));
    }

    #[test]
    fn circle_distance_is_a_metric(x in 0.0..std::f64::consts::TAU, y in 0.0..std::f64::consts::TAU, z in 0.0..std::f64::consts::TAU) {
        let dxy = circle_distance(x, y);
        prop_assert!((0.0..=std::f64::consts::PI + 1e-12).contains(&dxy));
        prop_assert!((dxy - circle_distance(y, x)).abs() < 1e-12);
        prop_assert!(circle_distance(x, x) < 1e-15);
        prop_assert!(dxy <= circle_distance(x, z) + circle_distance(z, y) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reported_zeros_are_zeros(a in coeffs(8), b in coeffs(8)) {
        let k = a.len().min(b.len());
        let g = FourierFunction::new(0.0, a[..k].to_vec(), b[..k].to_vec());
        let m = OscillatorModel::new(1.0, g, 1.0).unwrap();
        let zeros = m.find_zeros(phaseosc::model::default_scan_grid(k)).unwrap();
        for z in &zeros.zeros {
            prop_assert!(m.f(z.phi).abs() < 1e-10, "|f| = {} at {}", m.f(z.phi).abs(), z.phi);
            prop_assert!((z.slope - m.f1(z.phi)).abs() < 1e-12);
        }
        // Strictly increasing phases in [0, 2 pi).
        for w in zeros.zeros.windows(2) {
            prop_assert!(w[0].phi < w[1].phi);
        }
    }
}
