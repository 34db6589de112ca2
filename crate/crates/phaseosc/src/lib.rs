//! Analysis toolkit for stochastic phase oscillators on the circle,
//! d phi = rho dt + f(phi) o dW (Stratonovich).
//!
//! The crate solves the stationary Fokker-Planck equation for the one-point
//! density, estimates the Lyapunov exponent of the linearization by several
//! independent routes, and demonstrates noise-induced synchronization by
//! direct simulation with common noise. A CLI (`phaseosc`) ties the pieces
//! together and ships a self-checking verification suite.

pub mod cli;
pub mod corpus;
pub mod density;
pub mod dynamics;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod lyapunov;
pub mod model;
pub mod noise;
pub mod ode;
pub mod output;
pub mod verify;

pub use error::{Error, Result};
pub use fourier::FourierFunction;
pub use model::{GenericityReport, NoiseClass, OscillatorModel, ZeroSet};
pub use noise::NoiseStream;
