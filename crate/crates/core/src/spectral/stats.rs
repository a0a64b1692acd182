//! Quantum-ergodicity statistics in a certified eigenbasis.

use faer::Mat;

use super::eigen::EigenSystem;
use crate::algebra::{normalized_trace_pairing, weyl_quantize, FourierObservable, TorusOperator};
use crate::classical::Window;
use crate::error::{Error, Result};
use crate::phase::e;
use crate::C64;

/// `M_ij = ⟨ψ_i, Op[a] ψ_j⟩` for the centered observable.
#[derive(Clone, Debug)]
pub struct MatrixElementTable {
    pub label: String,
    pub mean: f64,
    entries: Mat<C64>,
}

impl MatrixElementTable {
    pub fn new(es: &EigenSystem, a: &FourierObservable<f64>, label: impl Into<String>) -> Result<Self> {
        let op = weyl_quantize(es.dim(), &a.centered());
        Self::from_operator(es, &op, a.mean().re, label)
    }

    pub fn from_operator(es: &EigenSystem, op: &TorusOperator, mean: f64, label: impl Into<String>) -> Result<Self> {
        if op.dim() != es.dim() {
            return Err(Error::DimensionMismatch { left: es.dim(), right: op.dim() });
        }
        let v = es.vectors();
        let entries = v.adjoint() * (op.mat() * v);
        Ok(MatrixElementTable { label: label.into(), mean, entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &Mat<C64> {
        &self.entries
    }

    /// `max |M − M*|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                d = d.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// `(1/N) Σ_ij |M_ij|²`.
    pub fn hilbert_schmidt(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += self.entries[(i, j)].norm_sqr();
            }
        }
        s / n as f64
    }

    /// Mean of the diagonal entries (zero up to rounding for a centered observable).
    pub fn diagonal_mean(&self) -> C64 {
        let n = self.dim();
        (0..n).map(|j| self.entries[(j, j)]).sum::<C64>() / n as f64
    }
}

/// `S₂(N) = (1/N) Σ_j |⟨ψ_j, Op[a]ψ_j⟩ − ā|²` with its degeneracy context.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceReport {
    pub value: f64,
    pub n_clusters: usize,
    pub largest_cluster: usize,
}

impl VarianceReport {
    /// Under degenerate clusters the value depends on the solver's basis choice.
    pub fn basis_dependent(&self) -> bool {
        self.n_clusters > 0
    }
}

/// Diagonal entries `v_j* A v_j` of a Hermitian operator, one matrix product.
fn diagonal_elements(es: &EigenSystem, op: &TorusOperator) -> Vec<C64> {
    let v = es.vectors();
    let av = op.mat() * v;
    let n = es.dim();
    (0..n)
        .map(|j| {
            let mut s = C64::new(0.0, 0.0);
            for q in 0..n {
                s += v[(q, j)].conj() * av[(q, j)];
            }
            s
        })
        .collect()
}

pub fn quantum_variance(es: &EigenSystem, a: &FourierObservable<f64>) -> Result<VarianceReport> {
    a.check_real(1e-12)?;
    let op = weyl_quantize(es.dim(), &a.centered());
    let diag = diagonal_elements(es, &op);
    let value = diag.iter().map(|z| z.norm_sqr()).sum::<f64>() / es.dim() as f64;
    let report = VarianceReport { value, n_clusters: es.clusters().len(), largest_cluster: es.largest_cluster() };
    if report.basis_dependent() {
        log::warn!(
            "N = {}: {} degenerate clusters (largest {}); the variance depends on the eigenbasis",
            es.dim(),
            report.n_clusters,
            report.largest_cluster
        );
    }
    Ok(report)
}

/// Circular distance on `R/Z`.
pub fn circular_distance(x: f64) -> f64 {
    let d = x.rem_euclid(1.0);
    d.min(1.0 - d)
}

/// `(1/N) Σ |M_ij|²` over ordered pairs with `|θ_i − θ_j − ε/N|` (circular) at most `width`.
/// The default width is `N^{−1/2}`.
pub fn offdiagonal_window_sum(es: &EigenSystem, table: &MatrixElementTable, eps_shift: f64, width: Option<f64>) -> Result<f64> {
    let n = es.dim();
    if table.dim() != n {
        return Err(Error::DimensionMismatch { left: n, right: table.dim() });
    }
    let width = width.unwrap_or(1.0 / (n as f64).sqrt());
    let shift = eps_shift / n as f64;
    let th = es.phases();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if circular_distance(th[i] - th[j] - shift) <= width {
                s += table.get(i, j).norm_sqr();
            }
        }
    }
    Ok(s / n as f64)
}

/// `(1/N) Tr(Op[a] U^{−t} Op[a] U^t)` for the centered `a`, by traces.
pub fn quantum_autocorrelation(u: &TorusOperator, a: &FourierObservable<f64>, t: i64) -> Result<C64> {
    Ok(quantum_autocorrelations(u, a, &[t])?[0])
}

/// Trace route for several times, sharing the Heisenberg iteration.
pub fn quantum_autocorrelations(u: &TorusOperator, a: &FourierObservable<f64>, times: &[i64]) -> Result<Vec<C64>> {
    let op = weyl_quantize(u.dim(), &a.centered());
    let adj = u.adjoint();
    let mut out = vec![C64::new(0.0, 0.0); times.len()];
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by_key(|&i| (times[i] < 0, times[i].abs()));
    let (mut fwd, mut fwd_t) = (op.clone(), 0i64);
    let (mut bwd, mut bwd_t) = (op.clone(), 0i64);
    for i in order {
        let t = times[i];
        let h = if t >= 0 {
            while fwd_t < t {
                fwd = &(&adj * &fwd) * u;
                fwd_t += 1;
            }
            &fwd
        } else {
            while bwd_t > t {
                bwd = &(u * &bwd) * &adj;
                bwd_t -= 1;
            }
            &bwd
        };
        out[i] = normalized_trace_pairing(&op, h)?;
    }
    Ok(out)
}

/// Spectral route: `(1/N) Σ_ij |M_ij|² e(t(θ_j − θ_i))`.
pub fn spectral_autocorrelation(es: &EigenSystem, table: &MatrixElementTable, t: i64) -> C64 {
    let n = es.dim();
    let th = es.phases();
    let mut s = C64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            let w = table.get(i, j).norm_sqr();
            if w != 0.0 {
                s += e(t as f64 * (th[j] - th[i])) * w;
            }
        }
    }
    s / n as f64
}

/// Both sides of `(1/N) Σ_j |M_jj|² ≤ Σ_t f̂(t/T)/T · (1/N) Tr(Op[a] U^{−t} Op[a] U^t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowedBound {
    pub lhs: f64,
    pub rhs: f64,
    /// Imaginary part of the right-hand side, zero up to rounding.
    pub rhs_imag: f64,
}

impl WindowedBound {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

pub fn windowed_variance_bound(
    u: &TorusOperator,
    es: &EigenSystem,
    a: &FourierObservable<f64>,
    window: &Window,
) -> Result<WindowedBound> {
    window.check_properties()?;
    let lhs = quantum_variance(es, a)?.value;
    let tmax = window.support();
    let times: Vec<i64> = (-tmax..=tmax).collect();
    let corr = quantum_autocorrelations(u, a, &times)?;
    let mut rhs = C64::new(0.0, 0.0);
    for (t, c) in times.iter().zip(corr) {
        rhs += c * window.weight(*t);
    }
    Ok(WindowedBound { lhs, rhs: rhs.re, rhs_imag: rhs.im })
}
