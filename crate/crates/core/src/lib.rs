//! Ground-state local entanglement of the one-dimensional Hubbard model.
//!
//! The crate computes the von Neumann entropy of the single-site reduced
//! density matrix of a periodic Hubbard chain, using three independent
//! routes that cross-check each other:
//!
//! * closed-form thermodynamic-limit expressions at half filling
//!   (an oscillatory Bessel integral for the double occupancy, plus its
//!   strong- and weak-coupling series), in [`half_filling`];
//! * a Newton solver for the Lieb-Wu Bethe-ansatz equations on finite
//!   chains at arbitrary filling and magnetization, in [`bethe`];
//! * exact diagonalization of small chains as ground truth, in [`ed`].
//!
//! [`scans`] orchestrates parameter sweeps over coupling, filling and
//! magnetization, producing records a CLI can serialize for plotting.

pub mod bethe;
pub mod ed;
pub mod entanglement;
pub mod error;
pub mod half_filling;
pub mod scans;
pub mod special;

pub use error::{Error, Result};
