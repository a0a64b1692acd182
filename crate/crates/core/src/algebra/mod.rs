//! Discrete Weyl–Heisenberg algebra on `H_N`.

pub mod lattice;
pub mod observable;
pub mod operator;
pub mod quantize;

pub use lattice::LatticeVector;
pub use observable::FourierObservable;
pub use operator::{inner, normalized_trace_pairing, operator_norm, TorusOperator};
pub use quantize::{classical_pairing, quantize_grid, quantize_samples, translation_operator, weyl_quantize};
