//! Computational model of a room-temperature single-photon THz detector
//! built on six-wave mixing in a thermal Rydberg vapor.
//!
//! The crate is `no_std` with `alloc`; everything here is a pure function of
//! its inputs. File formats, configuration and the command-line harness live
//! in the companion `rydthz` crate.
//!
//! Modules follow the physical chain:
//!
//! * [`levels`]: six-level loop, rotating-frame Hamiltonian, Lindblad
//!   generator and steady state at a fixed atomic velocity.
//! * [`doppler`]: Maxwell–Boltzmann velocity averaging and the effective
//!   Doppler linewidth.
//! * [`mixing`]: energy/phase matching, the closed-form conversion
//!   efficiency, linear response, coupled-mode propagation, spectra and
//!   bandwidth extraction.
//! * [`detector`]: count rates, NEP, SNR and dynamic range.
//! * [`photon`]: Monte Carlo photon streams, detector chain and g²
//!   estimators.

#![no_std]
// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops follow the matrix element notation
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod consts;
pub mod detector;
pub mod doppler;
mod error;
pub mod levels;
pub mod linalg;
pub mod mixing;
pub mod ode;
pub mod photon;
pub mod quad;

pub use error::{Error, Result};
pub use num_complex::Complex64;
