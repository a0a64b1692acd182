//! Numerical laboratory for quantised maps on the 2-torus.
//!
//! The crate builds translation operators and Weyl quantisations on `H_N`, quantises cat,
//! perturbed cat and parabolic maps, measures Egorov defects, diagonalises the propagators and
//! computes quantum-ergodicity statistics. The classical side (observables, maps, windows and
//! fits) is generic over the [`Scalar`] type; operators are dense `f64` complex matrices.
//!
//! Conventions used everywhere:
//! - phase-space points are `x = (p, q)`; `a(x) = Σ â(n) e(n1 p + n2 q)`;
//! - `T_N(n)ψ(q) = e_N(n1 n2/2 + n2 q) ψ(q + n1)`;
//! - Heisenberg evolution is `U^{−t} Op[a] U^{t} ≈ Op[a ∘ Φ^t]`;
//! - eigenvalues are written `e(θ)` with `θ ∈ [0, 1)`.

pub mod algebra;
pub mod classical;
pub mod error;
pub mod harness;
pub mod phase;
pub mod propagators;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision complex number used for all operators.
pub type C64 = num_complex::Complex<f64>;

pub type Observable = algebra::FourierObservable<f64>;
pub type ObservableF32 = algebra::FourierObservable<f32>;

pub type Point = classical::TorusPoint<f64>;
pub type Map = classical::TorusMap<f64>;
