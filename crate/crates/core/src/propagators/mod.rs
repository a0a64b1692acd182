//! Unitary quantisations of torus maps and their Egorov defects.

mod egorov;
mod kick;
mod metaplectic;
mod parabolic;
mod propagator;

pub use egorov::{
    egorov_defect, egorov_defects, exact_egorov_defect, fit_egorov_growth, pushforward, pushforward_many,
    transport_defect, DefectRecord, EgorovFit, GrowthFit, GrowthModel, Pushforward, PushforwardMethod,
    TransportReport, EXACT_EGOROV_TOL,
};
pub use kick::{hermitian_exponential, kick, perturbed_cat, shear};
pub use metaplectic::metaplectic;
pub use parabolic::{lattice_index, lattice_map, momentum_translation, parabolic, ParabolicVariant};
pub use propagator::{Construction, Conventions, Propagator, UNITARITY_TOL};
