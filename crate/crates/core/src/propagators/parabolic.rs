use serde::{Deserialize, Serialize};

use super::kick::shear;
use super::propagator::{Construction, Propagator};
use crate::algebra::TorusOperator;
use crate::classical::TorusMap;
use crate::error::{Error, Result};
use crate::phase::{e, e_frac};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParabolicVariant {
    /// Momentum translation by `m/N`, `m = round(Nα)`: exact for `Ψ_{m/N}`.
    #[default]
    Lattice,
    /// `diag(e(α q))` on `q = 0, …, N−1`, keeping the irrational `α`.
    Phase,
}

impl ParabolicVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParabolicVariant::Lattice => "lattice",
            ParabolicVariant::Phase => "phase",
        }
    }
}

/// Lattice translation index `round(Nα)`.
pub fn lattice_index(n: usize, alpha: f64) -> i64 {
    (n as f64 * alpha).round() as i64
}

/// `U = V · S` quantising `Ψ_α(p, q) = (p + α, q + 2p)`.
pub fn parabolic(n: usize, alpha: f64, variant: ParabolicVariant) -> Result<Propagator> {
    if n < 2 {
        return Err(Error::Refused(format!("parabolic propagator needs N ≥ 2, got {n}")));
    }
    let v: Vec<_> = match variant {
        ParabolicVariant::Lattice => {
            let m = lattice_index(n, alpha);
            (0..n).map(|q| e_frac(m as i128 * q as i128, n as u64)).collect()
        }
        ParabolicVariant::Phase => (0..n).map(|q| e(alpha * q as f64)).collect(),
    };
    let mut op = shear(n)?;
    let mat = op.mat_mut();
    for (q, ph) in v.iter().enumerate() {
        for j in 0..n {
            mat[(q, j)] *= *ph;
        }
    }
    let construction = match variant {
        ParabolicVariant::Lattice => Construction::ParabolicLattice,
        ParabolicVariant::Phase => Construction::ParabolicPhase,
    };
    Propagator::checked(op, TorusMap::parabolic(alpha), construction)
}

/// The classical map a lattice-variant propagator quantises exactly.
pub fn lattice_map(n: usize, alpha: f64) -> TorusMap<f64> {
    TorusMap::parabolic(lattice_index(n, alpha) as f64 / n as f64)
}

/// Operator `diag(e_N(m q))`; exposed for tests of the translation identity.
pub fn momentum_translation(n: usize, m: i64) -> TorusOperator {
    let d: Vec<_> = (0..n).map(|q| e_frac(m as i128 * q as i128, n as u64)).collect();
    TorusOperator::diagonal(&d)
}
