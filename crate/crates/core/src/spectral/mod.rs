//! Eigen-decompositions and quantum-ergodicity statistics.

mod eigen;
mod stats;

pub use eigen::{diagonalize, EigenSystem, CLUSTER_TOL_PER_DIM, GRAM_TOL, RESIDUAL_TOL, UNITARITY_PRECONDITION};
pub use stats::{
    circular_distance, offdiagonal_window_sum, quantum_autocorrelation, quantum_autocorrelations, quantum_variance,
    spectral_autocorrelation, windowed_variance_bound, MatrixElementTable, VarianceReport, WindowedBound,
};
