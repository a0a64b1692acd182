use faer::Side;

use super::metaplectic::{lattice_metaplectic, metaplectic};
use super::propagator::{Construction, Propagator};
use crate::algebra::{weyl_quantize, FourierObservable, TorusOperator};
use crate::classical::{CatMatrix, TorusMap};
use crate::error::{Error, Result};
use crate::C64;

/// Hermiticity tolerance for `Op_N[g]`, relative to its Frobenius norm.
const HERMITIAN_TOL: f64 = 1e-12;

/// `exp(−2πi N ε H)` for Hermitian `H`, via its eigendecomposition.
pub fn hermitian_exponential(h: &TorusOperator, n_eps: f64) -> Result<TorusOperator> {
    let scale = h.frobenius().max(1.0);
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    let eig = h
        .mat()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Solver(format!("Hermitian eigendecomposition failed: {e:?}")))?;
    let v = eig.U();
    let s = eig.S();
    let dim = h.dim();
    let phases: Vec<C64> = (0..dim)
        .map(|k| C64::from_polar(1.0, -std::f64::consts::TAU * n_eps * s[k].re))
        .collect();
    let scaled = faer::Mat::from_fn(dim, dim, |i, k| v[(i, k)] * phases[k]);
    Ok(TorusOperator::from_mat(&scaled * v.adjoint()))
}

/// Kick `exp(−2πi N ε Op_N[g])`, quantising the time-ε flow of `g`.
pub fn kick(n: usize, g: &FourierObservable<f64>, eps: f64) -> Result<Propagator> {
    g.check_real(1e-12)?;
    let op = if eps == 0.0 {
        TorusOperator::identity(n)
    } else {
        hermitian_exponential(&weyl_quantize(n, g), n as f64 * eps)?
    };
    let source = TorusMap::perturbed_cat(CatMatrix::new(1, 0, 0, 1)?, g.clone(), eps)?;
    Propagator::checked(op, source, Construction::Kick)
}

/// `kick(g, ε) · metaplectic(A)`, quantising `φ^ε ∘ A`.
pub fn perturbed_cat(n: usize, a: CatMatrix, g: &FourierObservable<f64>, eps: f64) -> Result<Propagator> {
    let m = metaplectic(n, a)?;
    let source = TorusMap::perturbed_cat(a, g.clone(), eps)?;
    if eps == 0.0 {
        return Ok(Propagator { source, ..m });
    }
    let k = kick(n, g, eps)?;
    Propagator::checked(&k.op * &m.op, source, Construction::Product)
}

/// Shear `F_+ diag(e_N(−q²)) F_−`, quantising `(p, q) ↦ (p, q + 2p)`.
pub fn shear(n: usize) -> Result<TorusOperator> {
    lattice_metaplectic(n, [[1, 2], [0, 1]])
}
