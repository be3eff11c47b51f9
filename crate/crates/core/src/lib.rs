//! Quantum and mean-field dynamics of a periodically driven bosonic dimer.
//!
//! The quantum side builds the one-cycle evolution operator of the two-site
//! Bose-Hubbard model, diagonalises it, and analyses the Floquet states by
//! their coherence and Husimi distributions. The mean-field side integrates
//! the classical limit, builds stroboscopic sections, locates periodic orbits
//! and quantises regular islands semiclassically.

pub mod coherence;
pub mod error;
pub mod floquet;
pub mod linalg;
pub mod meanfield;
pub mod model;
pub mod ode;
pub mod propagator;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use model::{DimerParams, FockBasis, HamiltonianMatrix, MeanFieldParams, Tridiagonal};
pub use propagator::{IntegratorSettings, Method, OneCycleOperator, Propagator, StateVector};
pub use floquet::FloquetSpectrum;
pub use coherence::{CoherentStateSpec, HusimiGrid, HusimiGridSpec, ReducedDensityMatrix};
