//! Dense operators on `H_N = L²(Z_N)` in the position basis.
//!
//! Matrix entries are plain (weight-free); only state inner products carry the `1/N` weight.

use std::ops::{Add, Mul, Sub};

use faer::Mat;

use crate::error::{Error, Result};
use crate::C64;

/// Threshold below which operator norms use a full singular value decomposition.
pub const FULL_SVD_MAX_DIM: usize = 512;

#[derive(Clone, Debug)]
pub struct TorusOperator {
    mat: Mat<C64>,
}

impl TorusOperator {
    pub fn from_mat(mat: Mat<C64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "torus operators are square");
        TorusOperator { mat }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        TorusOperator { mat: Mat::from_fn(n, n, f) }
    }

    pub fn zeros(n: usize) -> Self {
        TorusOperator { mat: Mat::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        TorusOperator { mat: Mat::identity(n, n) }
    }

    pub fn diagonal(d: &[C64]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, z) in d.iter().enumerate() {
            m[(i, i)] = *z;
        }
        TorusOperator { mat: m }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn mat_mut(&mut self) -> &mut Mat<C64> {
        &mut self.mat
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn adjoint(&self) -> TorusOperator {
        TorusOperator { mat: self.mat.adjoint().to_owned() }
    }

    pub fn scale(&self, s: C64) -> TorusOperator {
        TorusOperator { mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * s) }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn check_dim(&self, other: &TorusOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    /// Frobenius norm `(Σ|A_ij|²)^{1/2}`.
    pub fn frobenius(&self) -> f64 {
        self.mat.as_ref().norm_l2()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.mat.as_ref().norm_max()
    }

    /// `‖A − A*‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// `‖A A* − I‖_F`, an upper bound for the operator-norm defect.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = &self.mat * self.mat.adjoint();
        let n = self.dim();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                let d = if i == j { prod[(i, j)] - C64::new(1.0, 0.0) } else { prod[(i, j)] };
                s += d.norm_sqr();
            }
        }
        s.sqrt()
    }

    /// `A·v` for a state vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (j, vj) in v.iter().enumerate() {
            let col = self.mat.col_as_slice(j);
            for i in 0..n {
                out[i] += col[i] * vj;
            }
        }
        out
    }

    /// `U^{−t} A U^{t}` for unitary `U`.
    pub fn heisenberg(&self, u: &TorusOperator, t: i64) -> TorusOperator {
        let mut h = self.mat.clone();
        for _ in 0..t.unsigned_abs() {
            h = if t > 0 {
                u.mat.adjoint() * &h * &u.mat
            } else {
                &u.mat * &h * u.mat.adjoint()
            };
        }
        TorusOperator { mat: h }
    }

    /// Integer power `U^t`; negative powers use the adjoint (valid for unitaries).
    pub fn unitary_pow(&self, t: i64) -> TorusOperator {
        let base = if t < 0 { self.adjoint() } else { self.clone() };
        let mut acc = TorusOperator::identity(self.dim());
        for _ in 0..t.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }
}

/// `⟨ψ, φ⟩ = (1/N) Σ_q ψ*(q) φ(q)`.
pub fn inner(psi: &[C64], phi: &[C64]) -> C64 {
    assert_eq!(psi.len(), phi.len());
    let s: C64 = psi.iter().zip(phi).map(|(a, b)| a.conj() * b).sum();
    s / psi.len() as f64
}

/// `(1/N) Tr(A·B)`, computed entrywise in O(N²).
pub fn normalized_trace_pairing(a: &TorusOperator, b: &TorusOperator) -> Result<C64> {
    a.check_dim(b)?;
    let n = a.dim();
    let mut s = C64::new(0.0, 0.0);
    for j in 0..n {
        let acol = a.mat.col_as_slice(j);
        for (i, aij) in acol.iter().enumerate() {
            s += aij * b.mat[(j, i)];
        }
    }
    Ok(s / n as f64)
}

/// Largest singular value.
///
/// Dimensions up to [`FULL_SVD_MAX_DIM`] use a full SVD; larger ones run power iteration on
/// `A*A` to relative tolerance 1e−10 and fall back to the SVD when it stalls.
pub fn operator_norm(a: &TorusOperator) -> f64 {
    let n = a.dim();
    if n == 0 {
        return 0.0;
    }
    if n > FULL_SVD_MAX_DIM {
        if let Some(s) = power_norm(a, 1e-10, 500) {
            return s;
        }
        log::debug!("power iteration did not converge at N = {n}; using full SVD");
    }
    full_svd_norm(a)
}

fn full_svd_norm(a: &TorusOperator) -> f64 {
    a.mat
        .singular_values()
        .map(|s| s.first().copied().unwrap_or(0.0))
        .unwrap_or_else(|_| a.frobenius())
}

fn power_norm(a: &TorusOperator, rel_tol: f64, max_iter: usize) -> Option<f64> {
    let n = a.dim();
    // deterministic start vector with no special symmetry
    let mut v: Vec<C64> = (0..n)
        .map(|i| crate::phase::e(0.5 * ((i * i) as f64 * 0.6180339887498949).fract()) * (1.0 + (i % 7) as f64 / 7.0))
        .collect();
    let adj = a.adjoint();
    let mut prev = 0.0;
    for _ in 0..max_iter {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Some(0.0);
        }
        v.iter_mut().for_each(|z| *z /= norm);
        let w = adj.apply(&a.apply(&v));
        let lambda = v.iter().zip(&w).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
        if (lambda - prev).abs() <= rel_tol * lambda.abs() {
            return Some(lambda.max(0.0).sqrt());
        }
        prev = lambda;
        v = w;
    }
    None
}

impl<'a> Mul<&'a TorusOperator> for &'a TorusOperator {
    type Output = TorusOperator;
    fn mul(self, rhs: &'a TorusOperator) -> TorusOperator {
        TorusOperator { mat: &self.mat * &rhs.mat }
    }
}

impl<'a> Add<&'a TorusOperator> for &'a TorusOperator {
    type Output = TorusOperator;
    fn add(self, rhs: &'a TorusOperator) -> TorusOperator {
        TorusOperator { mat: &self.mat + &rhs.mat }
    }
}

impl<'a> Sub<&'a TorusOperator> for &'a TorusOperator {
    type Output = TorusOperator;
    fn sub(self, rhs: &'a TorusOperator) -> TorusOperator {
        TorusOperator { mat: &self.mat - &rhs.mat }
    }
}
