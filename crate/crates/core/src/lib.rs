//! Many-body dynamics of an optical lattice clock in which a gravitational
//! redshift gradient competes with collective cavity-mediated interactions.
//!
//! The crate is organised bottom-up:
//!
//! * [`spin`]: spin-1/2 product basis, sparse operators, Dicke states,
//!   density matrices and bipartite purity.
//! * [`hamiltonian`]: the redshift-plus-exchange Hamiltonian, one-axis
//!   twisting, global rotations and the cavity coupling map.
//! * [`evolve`]: Lanczos propagation of pure states, RK4 integration of the
//!   Lindblad equation, and a dense reference propagator.
//! * [`observables`]: per-site frequencies, synchronization time, squeezing,
//!   Rényi entropy, covariances and quantum Fisher information.
//! * [`dressing`] and [`clebsch`]: dressed-state mass-defect tuning and the
//!   Clebsch-Gordan-derived cavity couplings.
//! * [`budget`]: fractional-frequency magnitudes of relativistic corrections.
//! * [`analytics`]: closed-form predictions used as oracles for the numerics.
//! * [`experiments`]: configuration, presets and file output for the CLI.
//!
//! Conventions: site 0 is the least-significant bit of a basis index,
//! `|down> = 0`, `|up> = 1`, and hbar = 1 (frequencies in rad/s).

pub mod analytics;
pub mod budget;
pub mod clebsch;
pub mod dressing;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod hamiltonian;
pub mod observables;
pub mod spin;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
