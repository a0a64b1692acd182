//! Diagonalisation of unitary propagators through a Cayley transform.
//!
//! For a phase `φ` with `−1` outside the spectrum of `W = e^{iφ}U`, the matrix
//! `H = i(I − W)(I + W)^{−1}` is Hermitian with the same eigenvectors as `U`. A Hermitian solver
//! then gives an orthonormal eigenbasis even inside degenerate clusters; eigenphases are read
//! from Rayleigh quotients `v* U v` and certified by residuals.

use faer::prelude::Solve;
use faer::{Mat, Side};

use crate::algebra::TorusOperator;
use crate::error::{Error, Result};
use crate::C64;

pub const RESIDUAL_TOL: f64 = 1e-8;
pub const GRAM_TOL: f64 = 1e-9;
/// Input unitarity tolerance (Frobenius norm of `UU* − I`).
pub const UNITARITY_PRECONDITION: f64 = 1e-8;
/// Eigenphases closer than `CLUSTER_TOL_PER_DIM · N` (circularly) form a cluster.
pub const CLUSTER_TOL_PER_DIM: f64 = 1e-10;

/// Certified eigen-decomposition `U v_j = e(θ_j) v_j`, phases ascending in `[0, 1)`.
///
/// Columns `v_j` are orthonormal in the Euclidean inner product, so `ψ_j = √N v_j` is the
/// orthonormal basis for the `1/N`-weighted inner product and `⟨ψ_i, A ψ_j⟩ = v_i* A v_j`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    phases: Vec<f64>,
    vectors: Mat<C64>,
    residuals: Vec<f64>,
    clusters: Vec<Vec<usize>>,
    gram_defect: f64,
}

fn circular_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(1.0);
    d.min(1.0 - d)
}

impl EigenSystem {
    /// Certify candidate eigenvectors of `u`: compute Rayleigh phases and residuals, sort,
    /// detect clusters and check the invariants.
    pub fn from_vectors(u: &TorusOperator, vectors: Mat<C64>) -> Result<Self> {
        let n = u.dim();
        if vectors.nrows() != n || vectors.ncols() != n {
            return Err(Error::DimensionMismatch { left: n, right: vectors.nrows() });
        }
        let uv = u.mat() * &vectors;
        let mut phases = Vec::with_capacity(n);
        let mut residuals = Vec::with_capacity(n);
        for j in 0..n {
            let mut rq = C64::new(0.0, 0.0);
            for q in 0..n {
                rq += vectors[(q, j)].conj() * uv[(q, j)];
            }
            let theta = (rq.arg() / std::f64::consts::TAU).rem_euclid(1.0);
            let theta = if theta >= 1.0 { 0.0 } else { theta };
            let lambda = C64::from_polar(1.0, std::f64::consts::TAU * theta);
            let mut r = 0.0;
            for q in 0..n {
                r += (uv[(q, j)] - lambda * vectors[(q, j)]).norm_sqr();
            }
            phases.push(theta);
            residuals.push(r.sqrt());
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| phases[i].total_cmp(&phases[j]).then(i.cmp(&j)));
        let vectors = Mat::from_fn(n, n, |q, j| vectors[(q, order[j])]);
        let phases: Vec<f64> = order.iter().map(|&j| phases[j]).collect();
        let residuals: Vec<f64> = order.iter().map(|&j| residuals[j]).collect();

        let gram = vectors.adjoint() * &vectors;
        let mut gram_defect: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                gram_defect = gram_defect.max((gram[(i, j)] - want).norm());
            }
        }
        let es = EigenSystem { clusters: find_clusters(&phases, CLUSTER_TOL_PER_DIM * n as f64), phases, vectors, residuals, gram_defect };
        let max_res = es.max_residual();
        if !(max_res <= RESIDUAL_TOL) {
            return Err(Error::Solver(format!("eigen residual {max_res:e} exceeds {RESIDUAL_TOL:e}")));
        }
        if !(gram_defect <= GRAM_TOL) {
            return Err(Error::Solver(format!("eigenvector Gram defect {gram_defect:e} exceeds {GRAM_TOL:e}")));
        }
        Ok(es)
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn vectors(&self) -> &Mat<C64> {
        &self.vectors
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn gram_defect(&self) -> f64 {
        self.gram_defect
    }

    /// Groups (of size ≥ 2) of indices whose phases are within the cluster tolerance.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn largest_cluster(&self) -> usize {
        self.clusters.iter().map(Vec::len).max().unwrap_or(1)
    }

    /// Center of the widest circular gap between consecutive phases.
    pub fn widest_gap_center(&self) -> f64 {
        widest_gap_center(&self.phases)
    }
}

fn find_clusters(sorted: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let n = sorted.len();
    if n == 0 {
        return Vec::new();
    }
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for j in 1..n {
        if sorted[j] - sorted[j - 1] < tol {
            groups.last_mut().unwrap().push(j);
        } else {
            groups.push(vec![j]);
        }
    }
    // join across the 0 ≡ 1 seam
    if groups.len() > 1 && circular_distance(sorted[n - 1], sorted[0]) < tol {
        let last = groups.pop().unwrap();
        groups[0].splice(0..0, last);
    }
    groups.into_iter().filter(|g| g.len() > 1).collect()
}

fn widest_gap_center(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return 0.5;
    }
    let mut best = (1.0 - sorted[n - 1] + sorted[0], sorted[n - 1]);
    for j in 1..n {
        let gap = sorted[j] - sorted[j - 1];
        if gap > best.0 {
            best = (gap, sorted[j - 1]);
        }
    }
    (best.1 + best.0 / 2.0).rem_euclid(1.0)
}

/// Eigenvectors of `U` from the Cayley transform of `e^{iφ}U`, with `φ` chosen so that `−1`
/// sits at `gap_center` after rotation.
fn cayley_vectors(u: &TorusOperator, rotation: f64) -> Result<Mat<C64>> {
    let n = u.dim();
    let rot = C64::from_polar(1.0, std::f64::consts::TAU * rotation);
    let w = Mat::from_fn(n, n, |i, j| u.mat()[(i, j)] * rot);
    let id = Mat::<C64>::identity(n, n);
    let plus = &id + &w;
    let minus = &id - &w;
    // H = i(I − W)(I + W)^{−1}; the factors commute, so solve (I + W) X = (I − W)
    let x = plus.partial_piv_lu().solve(&minus);
    let ii = C64::new(0.0, 1.0);
    let h = Mat::from_fn(n, n, |r, c| 0.5 * (ii * x[(r, c)] + (ii * x[(c, r)]).conj()));
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Solver(format!("Hermitian eigendecomposition failed: {e:?}")))?;
    Ok(eig.U().to_owned())
}

/// Diagonalise a unitary matrix.
pub fn diagonalize(u: &TorusOperator) -> Result<EigenSystem> {
    let defect = u.unitarity_defect();
    if !(defect <= UNITARITY_PRECONDITION) {
        return Err(Error::invariant("unitarity of the input", defect, UNITARITY_PRECONDITION));
    }
    // a fixed irrational rotation first; on failure move −1 into the widest spectral gap
    let first_rotation = 0.5 - 0.318_309_886_183_790_7;
    let v = cayley_vectors(u, first_rotation)?;
    match EigenSystem::from_vectors(u, v.clone()) {
        Ok(es) => Ok(es),
        Err(first) => {
            let phases = rough_phases(u, &v);
            let center = widest_gap_center(&phases);
            // −1 = e(1/2); rotating by 1/2 − center moves the gap there
            let v = cayley_vectors(u, 0.5 - center)?;
            EigenSystem::from_vectors(u, v).map_err(|second| {
                Error::Solver(format!("diagonalisation failed twice: {first}; then {second}"))
            })
        }
    }
}

fn rough_phases(u: &TorusOperator, v: &Mat<C64>) -> Vec<f64> {
    let uv = u.mat() * v;
    let n = u.dim();
    let mut out: Vec<f64> = (0..n)
        .map(|j| {
            let mut rq = C64::new(0.0, 0.0);
            for q in 0..n {
                rq += v[(q, j)].conj() * uv[(q, j)];
            }
            (rq.arg() / std::f64::consts::TAU).rem_euclid(1.0)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}
