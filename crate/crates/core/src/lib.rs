//! Riemann problems for 2x2 systems of conservation laws
//! `u_t + F(u, v)_x = 0, v_t + G(u, v)_x = 0` with structural-stability
//! diagnostics: wave-curve construction, intersection-based Riemann solving,
//! transversality and genericity checks, flux surrogates and a
//! finite-volume cross-check.

pub mod approx;
pub mod error;
pub mod flux;
pub mod fvm;
pub mod io;
pub mod models;
pub mod numerics;
pub mod riemann;
pub mod stability;
pub mod state;
pub mod wave;

pub use error::{Error, Result};
pub use flux::{Family, FluxDerivs, FluxModel};
pub use state::{State, StateWindow};
