//! Classical dynamics on T²: maps, the perturbing flow, autocorrelations, windows and fits.

mod correlation;
mod fit;
mod flow;
mod map;
mod point;
mod window;

pub use correlation::{
    autocorrelation_exact, autocorrelation_sampled, autocorrelation_sampled_many, pairwise_sum,
    windowed_absolute_sum, windowed_ergodicity_sum, CorrelationMethod, CorrelationSeries, SampledValue,
};
pub use fit::{fit_decay_exponent, fit_logarithmic, linear_regression, LogFit, PowerFit};
pub use flow::{hamiltonian_flow, FlowSettings, HamiltonianFlow};
pub use map::{certified_diophantine, CatMatrix, Parabolic, PerturbedCat, TorusMap, DEFAULT_T_MAX, GOLDEN};
pub use point::{jacobian_det, TorusPoint};
pub use window::{Window, WindowKind};
