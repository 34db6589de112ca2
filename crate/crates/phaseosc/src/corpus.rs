//! Built-in test models, fixed in code so the verification suite is
//! hermetic.

use crate::fourier::FourierFunction;
use crate::model::OscillatorModel;

pub fn constant(rho: f64, c: f64) -> OscillatorModel {
    OscillatorModel::new(rho, FourierFunction::constant(c), 1.0).expect("valid model")
}

/// f(phi) = 2 + sin(phi): the standard non-vanishing model.
pub fn two_plus_sin(rho: f64) -> OscillatorModel {
    OscillatorModel::new(rho, FourierFunction::new(2.0, vec![0.0], vec![1.0]), 1.0)
        .expect("valid model")
}

/// f(phi) = sigma sin(phi): two transversal zeros.
pub fn sigma_sin(rho: f64, sigma: f64) -> OscillatorModel {
    OscillatorModel::new(rho, FourierFunction::sin(1.0), sigma).expect("valid model")
}

/// f(phi) = sin(2 phi): four transversal zeros.
pub fn sin_2phi(rho: f64) -> OscillatorModel {
    OscillatorModel::new(
        rho,
        FourierFunction::new(0.0, vec![0.0, 0.0], vec![0.0, 1.0]),
        1.0,
    )
    .expect("valid model")
}

/// f(phi) = 1 - cos(phi): tangential zero at 0, the non-generic control.
pub fn one_minus_cos(rho: f64) -> OscillatorModel {
    OscillatorModel::new(rho, FourierFunction::new(1.0, vec![-1.0], vec![0.0]), 1.0)
        .expect("valid model")
}

/// The generic models used by the negativity checks: 2 + sin, sigma sin for
/// sigma in {0.1, 0.5, 1.5}, and sin 2 phi, each at rho in {0.5, 1, 3}.
pub fn generic_models() -> Vec<(String, OscillatorModel)> {
    let mut out = Vec::new();
    for &rho in &[0.5, 1.0, 3.0] {
        out.push((format!("2+sin, rho={rho}"), two_plus_sin(rho)));
        for &sigma in &[0.1, 0.5, 1.5] {
            out.push((format!("{sigma}*sin, rho={rho}"), sigma_sin(rho, sigma)));
        }
        out.push((format!("sin(2phi), rho={rho}"), sin_2phi(rho)));
    }
    out
}
