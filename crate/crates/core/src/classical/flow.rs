//! Time-ε Hamiltonian flow of a Fourier-series Hamiltonian `g` on T².
//!
//! Equations of motion: `ṗ = −∂g/∂q`, `q̇ = ∂g/∂p`. Classical RK4 with a fixed substep,
//! guarded by a Richardson halving check.

use serde::{Deserialize, Serialize};

use super::point::TorusPoint;
use crate::algebra::FourierObservable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSettings {
    /// Substeps per unit of flow parameter ε is `substeps / ε`, i.e. `h = ε / substeps`.
    pub substeps: usize,
    /// Max-coordinate disagreement tolerated between `n` and `2n` substeps.
    pub richardson_tol: f64,
    /// Number of substep doublings before reporting step-size underflow.
    pub max_refinements: u32,
    /// Upper bound on `h·Ω`, where `Ω = Σ|ĝ(n)|(2π|n|)²` bounds the Hessian of `g`. Near
    /// elliptic points RK4 loses area like `(hΩ)⁶`, which a position-based check cannot see.
    pub max_step_stiffness: f64,
}

impl Default for FlowSettings {
    fn default() -> Self {
        FlowSettings { substeps: 32, richardson_tol: 1e-9, max_refinements: 8, max_step_stiffness: 0.03 }
    }
}

/// Precomputed gradient evaluator for a fixed Hamiltonian.
#[derive(Clone, Debug)]
pub struct HamiltonianFlow<T: Scalar> {
    // (2π n1, 2π n2, n1, n2, Re c, Im c)
    modes: Vec<(T, T, T, T, T, T)>,
    stiffness: f64,
    settings: FlowSettings,
}

impl<T: Scalar> HamiltonianFlow<T> {
    pub fn new(g: &FourierObservable<T>, settings: FlowSettings) -> Self {
        let tau = T::TAU();
        let modes = g
            .iter()
            .filter(|(n, _)| !n.is_zero())
            .map(|(n, c)| {
                let (n1, n2) = (T::from_i64(n.n1), T::from_i64(n.n2));
                (tau * n1, tau * n2, n1, n2, c.re, c.im)
            })
            .collect();
        let stiffness = g
            .iter()
            .map(|(n, c)| {
                let k = std::f64::consts::TAU * (n.n1 as f64).hypot(n.n2 as f64);
                Scalar::to_f64(c.norm()) * k * k
            })
            .sum();
        HamiltonianFlow { modes, stiffness, settings }
    }

    /// Substeps used for a flow of duration `eps`: `h = ε/substeps`, refined further if the
    /// stiffness bound requires it.
    pub fn substeps_for(&self, eps: T) -> usize {
        let base = self.settings.substeps.max(1);
        let needed = (Scalar::to_f64(eps.abs()) * self.stiffness / self.settings.max_step_stiffness).ceil();
        if needed.is_finite() && needed as usize > base {
            needed as usize
        } else {
            base
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.modes.is_empty()
    }

    /// Vector field `(ṗ, q̇) = (−∂g/∂q, ∂g/∂p)` at an unreduced point.
    #[inline]
    fn field(&self, p: T, q: T) -> (T, T) {
        let mut gp = T::zero();
        let mut gq = T::zero();
        for &(k1, k2, n1, n2, cr, ci) in &self.modes {
            let arg = n1 * p + n2 * q;
            let theta = T::TAU() * (arg - arg.round());
            let (s, c) = theta.sin_cos();
            // Re(c e^{iθ}) = cr cos θ − ci sin θ
            let d = -(cr * s + ci * c);
            gp = gp + k1 * d;
            gq = gq + k2 * d;
        }
        (-gq, gp)
    }

    fn rk4(&self, x: TorusPoint<T>, eps: T, steps: usize) -> (T, T) {
        let h = eps / T::from_f64(steps as f64);
        let half = T::from_f64(0.5);
        let sixth = T::one() / T::from_f64(6.0);
        let two = T::from_f64(2.0);
        let (mut p, mut q) = (x.p(), x.q());
        for _ in 0..steps {
            let k1 = self.field(p, q);
            let k2 = self.field(p + half * h * k1.0, q + half * h * k1.1);
            let k3 = self.field(p + half * h * k2.0, q + half * h * k2.1);
            let k4 = self.field(p + h * k3.0, q + h * k3.1);
            p = p + h * sixth * (k1.0 + two * k2.0 + two * k3.0 + k4.0);
            q = q + h * sixth * (k1.1 + two * k2.1 + two * k3.1 + k4.1);
        }
        (p, q)
    }

    /// Time-ε flow with the configured substep, no error check.
    pub fn advance(&self, x: TorusPoint<T>, eps: T) -> TorusPoint<T> {
        if self.is_trivial() || eps == T::zero() {
            return x;
        }
        let (p, q) = self.rk4(x, eps, self.substeps_for(eps));
        TorusPoint::new(p, q)
    }

    /// Time-ε flow with Richardson halving: the substep is halved until `n` and `2n` substeps
    /// agree within `richardson_tol`.
    pub fn advance_checked(&self, x: TorusPoint<T>, eps: T) -> Result<TorusPoint<T>> {
        if self.is_trivial() || eps == T::zero() {
            return Ok(x);
        }
        let tol = T::from_f64(self.settings.richardson_tol);
        let mut steps = self.substeps_for(eps);
        let mut coarse = self.rk4(x, eps, steps);
        for _ in 0..=self.settings.max_refinements {
            let fine = self.rk4(x, eps, 2 * steps);
            let err = (fine.0 - coarse.0).abs().max((fine.1 - coarse.1).abs());
            if err <= tol {
                return Ok(TorusPoint::new(fine.0, fine.1));
            }
            steps *= 2;
            coarse = fine;
        }
        Err(Error::Integrator(format!(
            "step-size underflow: {} substeps still disagree beyond {:e}",
            steps, self.settings.richardson_tol
        )))
    }
}

/// Time-ε flow of `g` starting from `x`, with the Richardson check.
pub fn hamiltonian_flow<T: Scalar>(
    g: &FourierObservable<T>,
    eps: T,
    x: TorusPoint<T>,
    settings: FlowSettings,
) -> Result<TorusPoint<T>> {
    HamiltonianFlow::new(g, settings).advance_checked(x, eps)
}
