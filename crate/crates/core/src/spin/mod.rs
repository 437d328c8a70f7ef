//! Spin-1/2 product-basis substrate.
//!
//! Basis index bit `j` holds the state of site `j` (0 = down, 1 = up), so
//! site 0 is the least-significant bit.

mod density;
mod dicke;
mod operators;
mod sparse;
mod state;

pub use density::DensityMatrix;
pub use dicke::{dicke_expand, DickeState};
pub use operators::{collective_apply, collective_operator, local_operator, total_spin_squared};
pub use sparse::SparseOperator;
pub use state::{partial_trace_purity, product_state, SpinState};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Component of a spin-1/2 operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl Axis {
    pub const CARTESIAN: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// Anything that can be applied to a state vector.
///
/// Implemented by [`SparseOperator`] and by matrix-free structured
/// operators such as [`crate::hamiltonian::CgrOperator`].
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// Writes `A x` into `y`.
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

/// Hilbert-space dimension of `n` spins, guarded against overflow.
pub fn hilbert_dim(n_atoms: usize) -> crate::Result<usize> {
    if n_atoms == 0 || n_atoms > 30 {
        return Err(crate::Error::InvalidInput(format!(
            "atom number must be in 1..=30, got {n_atoms}"
        )));
    }
    Ok(1usize << n_atoms)
}

/// Deterministic inner product `<a|b>`: fixed-size partial sums added in order,
/// so results do not depend on the thread count.
pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    use rayon::prelude::*;
    const CHUNK: usize = 4096;
    let partial: Vec<C64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.conj() * q).sum())
        .collect();
    partial.into_iter().sum()
}

pub(crate) fn norm_sqr(a: &[C64]) -> f64 {
    use rayon::prelude::*;
    const CHUNK: usize = 4096;
    let partial: Vec<f64> = a.par_chunks(CHUNK).map(|x| x.iter().map(|p| p.norm_sqr()).sum()).collect();
    partial.into_iter().sum()
}
