//! The oscillator model d phi = rho dt + f(phi) o dW and its genericity
//! analysis: zero set of the coupling, transversality of each zero, and the
//! two hypotheses (non-constant coupling, transversal zeros) that the
//! negativity theorem needs.

use crate::error::{Error, Result};
use crate::fourier::FourierFunction;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// |f| threshold below which a point counts as a zero of the coupling.
pub const ZERO_TOL: f64 = 1e-10;
/// Relative transversality threshold: a zero is transversal when
/// |f'(z)| > TRANSVERSALITY_REL * max|f'|.
pub const TRANSVERSALITY_REL: f64 = 1e-6;
/// Harmonic coefficients below this are treated as absent by the
/// non-constancy check.
pub const COEFF_TOL: f64 = 1e-12;

/// Drift rho > 0 plus noise coupling sigma * f.
///
/// Everything downstream evaluates the effective (sigma-scaled) coupling;
/// the scaled series and its first two derivatives are precomputed once.
#[derive(Debug, Clone)]
pub struct OscillatorModel {
    rho: f64,
    sigma: f64,
    base: FourierFunction,
    f: FourierFunction,
    f1: FourierFunction,
    f2: FourierFunction,
    f3: FourierFunction,
}

impl OscillatorModel {
    pub fn new(rho: f64, f: FourierFunction, sigma: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::InvalidModel(format!("rho must be > 0, got {rho}")));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidModel(format!(
                "sigma must be >= 0, got {sigma}"
            )));
        }
        let eff = f.scaled(sigma);
        let f1 = eff.derivative();
        let f2 = f1.derivative();
        let f3 = f2.derivative();
        Ok(Self {
            rho,
            sigma,
            base: f,
            f: eff,
            f1,
            f2,
            f3,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn base_coupling(&self) -> &FourierFunction {
        &self.base
    }

    /// Effective coupling sigma * f.
    pub fn coupling(&self) -> &FourierFunction {
        &self.f
    }

    pub fn f(&self, phi: f64) -> f64 {
        self.f.eval(phi)
    }

    pub fn f1(&self, phi: f64) -> f64 {
        self.f1.eval(phi)
    }

    pub fn f2(&self, phi: f64) -> f64 {
        self.f2.eval(phi)
    }

    pub fn f3(&self, phi: f64) -> f64 {
        self.f3.eval(phi)
    }

    /// Same model with the noise multiplier replaced (used by sweeps).
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.rho, self.base.clone(), sigma)
    }

    /// Drift of the equivalent Ito equation: rho + f'(phi) f(phi) / 2.
    pub fn ito_drift(&self, phi: f64) -> f64 {
        self.rho + 0.5 * self.f1.eval(phi) * self.f.eval(phi)
    }

    /// True when the effective coupling is identically zero (sigma = 0 or a
    /// zero series). The oscillator degenerates to pure rotation.
    pub fn coupling_is_zero(&self) -> bool {
        self.f.is_zero(COEFF_TOL)
    }

    /// Locate the zero set of the effective coupling on [0, 2 pi).
    ///
    /// Scans `grid_n` uniform points for sign changes, refines each bracket
    /// by bisection to below 1e-13 and polishes with Newton steps on the
    /// exact derivative. Sign-preserving near-zeros (tangencies) are found
    /// by polishing local minima of |f| with Newton on f'.
    pub fn find_zeros(&self, grid_n: usize) -> Result<ZeroSet> {
        let degree = self.f.degree();
        let required = 4 * degree;
        if grid_n < required.max(4) {
            return Err(Error::DegreeTooHigh {
                grid_n,
                degree,
                required: required.max(4),
            });
        }
        if self.coupling_is_zero() {
            // Degenerate coupling: pure rotation, no transversal structure.
            return Ok(ZeroSet {
                zeros: vec![],
                classification: NoiseClass::NonVanishing,
            });
        }

        let h = TAU / grid_n as f64;
        let vals: Vec<f64> = (0..grid_n).map(|j| self.f.eval(h * j as f64)).collect();
        let mut roots: Vec<f64> = Vec::new();

        for j in 0..grid_n {
            let x0 = h * j as f64;
            let x1 = h * (j + 1) as f64;
            let (v0, v1) = (vals[j], vals[(j + 1) % grid_n]);
            if v0 == 0.0 {
                roots.push(x0);
                continue;
            }
            if v1 == 0.0 {
                continue; // owned by the next cell
            }
            if v0 * v1 < 0.0 {
                roots.push(self.refine_bracket(x0, x1));
            }
        }

        // Tangential candidates: local minima of |f| that never change sign.
        for j in 0..grid_n {
            let prev = vals[(j + grid_n - 1) % grid_n];
            let here = vals[j];
            let next = vals[(j + 1) % grid_n];
            if here == 0.0 || here * prev < 0.0 || here * next < 0.0 {
                continue;
            }
            if here.abs() <= prev.abs() && here.abs() <= next.abs() {
                if let Some(z) = self.refine_critical(h * j as f64) {
                    if self.f.eval(z).abs() < ZERO_TOL {
                        roots.push(z);
                    }
                }
            }
        }

        let mut zeros: Vec<Zero> = roots
            .into_iter()
            .map(|z| {
                let phi = crate::grid::wrap_phase(z);
                Zero {
                    phi,
                    slope: self.f1.eval(phi),
                }
            })
            .collect();
        zeros.sort_by(|a, b| a.phi.total_cmp(&b.phi));
        zeros.dedup_by(|b, a| crate::grid::circle_distance(a.phi, b.phi) < 1e-8);
        if zeros.len() > 1 {
            let first = zeros[0].phi;
            let last = zeros[zeros.len() - 1].phi;
            if crate::grid::circle_distance(first, last) < 1e-8 {
                zeros.pop();
            }
        }

        let classification = if zeros.is_empty() {
            NoiseClass::NonVanishing
        } else {
            NoiseClass::Vanishing
        };
        Ok(ZeroSet {
            zeros,
            classification,
        })
    }

    fn refine_bracket(&self, mut lo: f64, mut hi: f64) -> f64 {
        let mut flo = self.f.eval(lo);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            let fm = self.f.eval(mid);
            if fm == 0.0 {
                return mid;
            }
            if flo * fm < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        let mut z = 0.5 * (lo + hi);
        for _ in 0..3 {
            let d = self.f1.eval(z);
            if d.abs() < 1e-300 {
                break;
            }
            let step = self.f.eval(z) / d;
            if !step.is_finite() {
                break;
            }
            z -= step;
        }
        z
    }

    /// Newton on f' to land on the critical point nearest `start`.
    fn refine_critical(&self, start: f64) -> Option<f64> {
        let mut z = start;
        for _ in 0..60 {
            let d1 = self.f1.eval(z);
            let d2 = self.f2.eval(z);
            if d2.abs() < 1e-300 {
                return None;
            }
            let step = d1 / d2;
            if !step.is_finite() {
                return None;
            }
            z -= step;
            if step.abs() < 1e-14 {
                return Some(z);
            }
        }
        None
    }

    /// Evaluate both genericity hypotheses.
    pub fn check_genericity(&self) -> GenericityReport {
        let grid_n = default_scan_grid(self.f.degree());
        let zero_set = self
            .find_zeros(grid_n)
            .expect("default scan grid satisfies the degree bound");
        let h1_holds = self.f.max_harmonic() > COEFF_TOL;

        let scan = crate::grid::CircleGrid::new(grid_n).expect("grid_n >= 4");
        let max_slope = scan
            .nodes()
            .map(|p| self.f1.eval(p).abs())
            .fold(0.0_f64, f64::max);
        let min_abs_slope = zero_set
            .zeros
            .iter()
            .map(|z| z.slope.abs())
            .fold(f64::INFINITY, f64::min);
        let h2_holds = min_abs_slope > TRANSVERSALITY_REL * max_slope;

        GenericityReport {
            h1_holds,
            h2_holds,
            zero_set,
            min_abs_slope,
        }
    }
}

/// Default root-scan resolution: comfortably above the 4K sign-change bound.
pub fn default_scan_grid(degree: usize) -> usize {
    1024.max(16 * degree)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseClass {
    NonVanishing,
    Vanishing,
}

/// One zero of the coupling with its exact slope f'(phi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub phi: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub zeros: Vec<Zero>,
    pub classification: NoiseClass,
}

impl ZeroSet {
    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn phis(&self) -> Vec<f64> {
        self.zeros.iter().map(|z| z.phi).collect()
    }
}

/// Verdicts for the two hypotheses plus the raw evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub h1_holds: bool,
    pub h2_holds: bool,
    pub zero_set: ZeroSet,
    /// min |f'| over the zero set; +inf when the set is empty.
    pub min_abs_slope: f64,
}

impl GenericityReport {
    pub fn is_generic(&self) -> bool {
        self.h1_holds && self.h2_holds
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn model(f: FourierFunction) -> OscillatorModel {
        OscillatorModel::new(1.0, f, 1.0).unwrap()
    }

    #[test]
    fn rejects_nonpositive_rho() {
        assert!(OscillatorModel::new(0.0, FourierFunction::sin(1.0), 1.0).is_err());
        assert!(OscillatorModel::new(-1.0, FourierFunction::sin(1.0), 1.0).is_err());
    }

    #[test]
    fn ito_drift_for_sin() {
        // rho + cos(pi/4) sin(pi/4) / 2 = 1 + 1/4.
        let m = model(FourierFunction::sin(1.0));
        assert!((m.ito_drift(PI / 4.0) - 1.25).abs() < 1e-14);
        assert!((m.ito_drift(0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ito_drift_constant_coupling() {
        let m = model(FourierFunction::constant(3.0));
        for phi in [0.0, 1.0, 4.5] {
            assert!((m.ito_drift(phi) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zeros_of_sin() {
        let zs = model(FourierFunction::sin(1.0)).find_zeros(1024).unwrap();
        assert_eq!(zs.classification, NoiseClass::Vanishing);
        assert_eq!(zs.zeros.len(), 2);
        assert!(zs.zeros[0].phi.abs() < 1e-12);
        assert!((zs.zeros[0].slope - 1.0).abs() < 1e-10);
        assert!((zs.zeros[1].phi - PI).abs() < 1e-12);
        assert!((zs.zeros[1].slope + 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_plus_sin_has_no_zeros() {
        let zs = model(FourierFunction::new(2.0, vec![0.0], vec![1.0]))
            .find_zeros(1024)
            .unwrap();
        assert_eq!(zs.classification, NoiseClass::NonVanishing);
        assert!(zs.is_empty());
    }

    #[test]
    fn zeros_of_sin_2phi() {
        let m = model(FourierFunction::new(0.0, vec![0.0, 0.0], vec![0.0, 1.0]));
        let zs = m.find_zeros(1024).unwrap();
        let phis = zs.phis();
        let slopes: Vec<f64> = zs.zeros.iter().map(|z| z.slope).collect();
        assert_eq!(phis.len(), 4);
        for (got, want) in phis.iter().zip([0.0, PI / 2.0, PI, 3.0 * PI / 2.0]) {
            assert!((got - want).abs() < 1e-11, "got {got}, want {want}");
        }
        for (got, want) in slopes.iter().zip([2.0, -2.0, 2.0, -2.0]) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn degree_bound_enforced() {
        let m = model(FourierFunction::new(
            0.0,
            vec![0.0; 8],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        ));
        assert!(matches!(
            m.find_zeros(16),
            Err(Error::DegreeTooHigh { .. })
        ));
        assert!(m.find_zeros(64).is_ok());
    }

    #[test]
    fn genericity_constant() {
        let rep = model(FourierFunction::constant(1.0)).check_genericity();
        assert!(!rep.h1_holds);
        assert!(rep.h2_holds);
        assert!(rep.zero_set.is_empty());
        assert_eq!(rep.min_abs_slope, f64::INFINITY);
    }

    #[test]
    fn genericity_sin() {
        let rep = model(FourierFunction::sin(1.0)).check_genericity();
        assert!(rep.h1_holds);
        assert!(rep.h2_holds);
        assert!(rep.is_generic());
    }

    #[test]
    fn one_minus_cos_fails_transversality() {
        // f(phi) = 1 - cos(phi): double root at 0 with f'(0) = 0.
        let rep = model(FourierFunction::new(1.0, vec![-1.0], vec![0.0])).check_genericity();
        assert!(rep.h1_holds);
        assert!(!rep.h2_holds, "min slope = {}", rep.min_abs_slope);
        assert_eq!(rep.zero_set.zeros.len(), 1);
        assert!(rep.zero_set.zeros[0].phi.abs() < 1e-7);
    }

    #[test]
    fn sigma_zero_is_degenerate_and_non_generic() {
        let m = OscillatorModel::new(1.0, FourierFunction::sin(1.0), 0.0).unwrap();
        assert!(m.coupling_is_zero());
        let rep = m.check_genericity();
        assert!(!rep.h1_holds);
        assert!(rep.zero_set.is_empty());
    }

    #[test]
    fn tangential_zero_off_grid_detected() {
        // f(phi) = 1 + cos(phi - 1): double root at phi = pi + 1, never a
        // scan node. cos(phi - 1) = cos(1) cos(phi) + sin(1) sin(phi).
        let f = FourierFunction::new(1.0, vec![1.0_f64.cos()], vec![1.0_f64.sin()]);
        let rep = model(f).check_genericity();
        assert_eq!(rep.zero_set.zeros.len(), 1);
        assert!((rep.zero_set.zeros[0].phi - (PI + 1.0)).abs() < 1e-6);
        assert!(!rep.h2_holds);
    }
}
