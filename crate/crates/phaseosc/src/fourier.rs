//! Truncated Fourier series on the circle with exact differentiation.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A real trigonometric polynomial
/// g(phi) = a0 + sum_{k=1..K} (a_k cos k phi + b_k sin k phi).
///
/// Exactly 2 pi periodic by construction, and closed under differentiation,
/// so derivatives carry no approximation error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierFunction {
    pub a0: f64,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

impl FourierFunction {
    pub fn new(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Self {
        let mut f = Self { a0, a, b };
        let k = f.a.len().max(f.b.len());
        f.a.resize(k, 0.0);
        f.b.resize(k, 0.0);
        f
    }

    pub fn constant(c: f64) -> Self {
        Self::new(c, vec![], vec![])
    }

    /// sigma * sin(phi)
    pub fn sin(scale: f64) -> Self {
        Self::new(0.0, vec![0.0], vec![scale])
    }

    pub fn cos(scale: f64) -> Self {
        Self::new(0.0, vec![scale], vec![0.0])
    }

    /// Truncation degree K.
    pub fn degree(&self) -> usize {
        self.a.len()
    }

    /// Largest harmonic coefficient magnitude (k >= 1 terms only).
    pub fn max_harmonic(&self) -> f64 {
        self.a
            .iter()
            .chain(self.b.iter())
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Series evaluation. cos(k phi) and sin(k phi) come from the angle
    /// recurrence, so one sin/cos pair serves the whole sum.
    pub fn eval(&self, phi: f64) -> f64 {
        let phi = phi.rem_euclid(TAU);
        if self.a.is_empty() {
            return self.a0;
        }
        let (s1, c1) = phi.sin_cos();
        let mut s = s1;
        let mut c = c1;
        let mut acc = self.a0;
        for k in 0..self.a.len() {
            acc += self.a[k] * c + self.b[k] * s;
            let (cn, sn) = (c * c1 - s * s1, s * c1 + c * s1);
            c = cn;
            s = sn;
        }
        acc
    }

    /// Exact derivative: degree-K series maps to degree-K series with
    /// a0' = 0, a_k' = k b_k, b_k' = -k a_k.
    pub fn derivative(&self) -> Self {
        let k = self.a.len();
        let mut a = vec![0.0; k];
        let mut b = vec![0.0; k];
        for i in 0..k {
            let n = (i + 1) as f64;
            a[i] = n * self.b[i];
            b[i] = -n * self.a[i];
        }
        Self { a0: 0.0, a, b }
    }

    /// Coefficient-wise scaling (used for the sigma noise multiplier).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            a0: self.a0 * factor,
            a: self.a.iter().map(|c| c * factor).collect(),
            b: self.b.iter().map(|c| c * factor).collect(),
        }
    }

    /// True when every coefficient (including a0) is below `tol` in magnitude.
    pub fn is_zero(&self, tol: f64) -> bool {
        self.a0.abs() < tol && self.max_harmonic() < tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eval_sin_at_half_pi() {
        let g = FourierFunction::sin(1.0);
        assert!((g.eval(PI / 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eval_constant() {
        let g = FourierFunction::constant(2.0);
        for phi in [0.0, 1.0, 3.9, -7.2] {
            assert_eq!(g.eval(phi), 2.0);
        }
    }

    #[test]
    fn eval_two_plus_sin() {
        let g = FourierFunction::new(2.0, vec![0.0], vec![1.0]);
        assert!((g.eval(3.0 * PI / 2.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn derivative_of_sin_is_cos() {
        let d = FourierFunction::sin(1.0).derivative();
        assert_eq!(d.a0, 0.0);
        assert_eq!(d.a, vec![1.0]);
        assert_eq!(d.b, vec![0.0]);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let d = FourierFunction::constant(5.0).derivative();
        assert!(d.is_zero(0.0_f64.max(f64::MIN_POSITIVE)));
    }

    #[test]
    fn second_derivative_of_sin2() {
        // d^2/dphi^2 sin(2 phi) = -4 sin(2 phi)
        let g = FourierFunction::new(0.0, vec![0.0, 0.0], vec![0.0, 1.0]);
        let d2 = g.derivative().derivative();
        assert_eq!(d2.a0, 0.0);
        assert_eq!(d2.a, vec![0.0, 0.0]);
        assert_eq!(d2.b, vec![0.0, -4.0]);
    }

    #[test]
    fn periodicity_to_machine_precision() {
        let g = FourierFunction::new(0.3, vec![1.0, -0.5, 0.2], vec![0.7, 0.1, -0.9]);
        assert!((g.eval(0.0) - g.eval(TAU)).abs() < 1e-12);
    }

    #[test]
    fn recurrence_matches_direct_trig() {
        let g = FourierFunction::new(0.1, vec![0.4, -1.2, 0.0, 0.8], vec![-0.3, 0.0, 2.0, -0.5]);
        for i in 0..97 {
            let phi = TAU * (i as f64) / 97.0;
            let direct: f64 = g.a0
                + (1..=4)
                    .map(|k| {
                        g.a[k - 1] * (k as f64 * phi).cos() + g.b[k - 1] * (k as f64 * phi).sin()
                    })
                    .sum::<f64>();
            assert!((g.eval(phi) - direct).abs() < 1e-12, "phi = {phi}");
        }
    }
}
