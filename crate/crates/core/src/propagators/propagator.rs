use serde::{Deserialize, Serialize};

use crate::algebra::TorusOperator;
use crate::classical::TorusMap;
use crate::error::{Error, Result};

/// Unitarity tolerance for every constructed propagator, in Frobenius norm of `UU* − I`.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    Metaplectic,
    Kick,
    Product,
    ParabolicLattice,
    ParabolicPhase,
}

impl Construction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Construction::Metaplectic => "metaplectic",
            Construction::Kick => "kick",
            Construction::Product => "product",
            Construction::ParabolicLattice => "parabolic-lattice",
            Construction::ParabolicPhase => "parabolic-phase",
        }
    }
}

/// Sign and normalisation choices a propagator was built with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub translation: String,
    pub symbol_expansion: String,
    pub heisenberg: String,
    pub kick_exponent: String,
    pub metaplectic: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            translation: "T_N(n)psi(q) = e_N(n1 n2/2 + n2 q) psi(q + n1)".into(),
            symbol_expansion: "a(p,q) = sum_n a^(n) e(n1 p + n2 q)".into(),
            heisenberg: "U^{-t} Op[a] U^t = Op[a o Phi^t]".into(),
            kick_exponent: "exp(-2 pi i N eps Op[g])".into(),
            metaplectic: "M* T_N(n) M = T_N(A^T n) for the classical matrix A".into(),
        }
    }
}

/// Unitary quantisation of a torus map.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub op: TorusOperator,
    /// Classical map the propagator is meant to quantise.
    pub source: TorusMap<f64>,
    pub construction: Construction,
    pub conventions: Conventions,
}

impl Propagator {
    pub(crate) fn checked(op: TorusOperator, source: TorusMap<f64>, construction: Construction) -> Result<Self> {
        let defect = op.unitarity_defect();
        if !(defect <= UNITARITY_TOL) {
            return Err(Error::invariant("propagator unitarity", defect, UNITARITY_TOL));
        }
        Ok(Propagator { op, source, construction, conventions: Conventions::default() })
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// `U*`, quantising the inverse map.
    pub fn adjoint(&self) -> Propagator {
        Propagator {
            op: self.op.adjoint(),
            source: self.source.inverse(),
            construction: self.construction,
            conventions: self.conventions.clone(),
        }
    }
}
