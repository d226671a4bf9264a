//! Correlated Markovian dephasing of qubit registers.
//!
//! The crate decides whether a dephasing environment `(C, h)` can entangle the
//! qubits it acts on. It transforms the generator coefficients under partial
//! transposition ([`pt`]) and inspects the smallest eigenvalue of the result.
//! It also provides exact dynamics ([`dynamics`]) and equivalence checks
//! ([`verify`]). A Bell-state tomography protocol ([`tomography`]) recovers
//! `(C, h)`, and [`ensembles`] runs random-environment studies.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;

pub mod dynamics;
pub mod ensembles;
pub mod linalg;
pub mod model;
pub mod pt;
pub mod rng;
pub mod spectral;
pub mod tomography;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Coefficients, DephasingModel};
pub use pt::{Bipartition, TransformedModel};

pub use nalgebra;
pub use num_complex::Complex64;
