//! Translation operators and torus Weyl quantisation.
//!
//! `T_N(n)ψ(q) = e_N(n1 n2/2 + n2 q) ψ(q + n1)`, indices mod N. With this normalisation
//! `T_N(m)T_N(n) = e_N(ω(m,n)/2) T_N(m+n)` and `T_N(n)* = T_N(−n)` hold for all integer
//! `m, n`. Lattice vectors are never reduced mod N: `T_N(n + 2N k) = T_N(n)` but
//! `T_N(n + N k)` can differ by a sign.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::lattice::LatticeVector;
use super::observable::FourierObservable;
use super::operator::TorusOperator;
use crate::phase::RootTable;
use crate::scalar::Scalar;
use crate::C64;

/// Phase numerator of `T_N(n)` at row `q`, over the denominator `2N`.
#[inline]
fn translation_phase_num(n: LatticeVector, q: usize) -> i128 {
    let (n1, n2) = (n.n1 as i128, n.n2 as i128);
    n1 * n2 + 2 * n2 * q as i128
}

pub fn translation_operator(dim: usize, n: LatticeVector) -> TorusOperator {
    assert!(dim >= 1, "Hilbert-space dimension must be positive");
    let table = RootTable::new(2 * dim as u64);
    let mut op = TorusOperator::zeros(dim);
    add_translation(&mut op, n, C64::new(1.0, 0.0), &table);
    op
}

fn add_translation(op: &mut TorusOperator, n: LatticeVector, coeff: C64, table: &RootTable) {
    let dim = op.dim();
    let shift = n.n1.rem_euclid(dim as i64) as usize;
    let m = op.mat_mut();
    for q in 0..dim {
        let col = (q + shift) % dim;
        m[(q, col)] += coeff * table.get(translation_phase_num(n, q));
    }
}

/// `Op_N[a] = Σ_n â(n) T_N(n)` over the stored support.
///
/// Logs a warning when the support radius reaches `N/2`; the operator is still exact, but
/// aliased modes then contribute to trace pairings.
pub fn weyl_quantize<T: Scalar>(dim: usize, a: &FourierObservable<T>) -> TorusOperator {
    assert!(dim >= 1, "Hilbert-space dimension must be positive");
    if 2 * a.radius() >= dim as i64 {
        log::warn!("support radius {} ≥ N/2 = {}: aliasing terms are not negligible", a.radius(), dim / 2);
    }
    let table = RootTable::new(2 * dim as u64);
    let mut op = TorusOperator::zeros(dim);
    for (n, c) in a.iter() {
        let c = C64::new(c.re.to_f64(), c.im.to_f64());
        add_translation(&mut op, n, c, &table);
    }
    op
}

/// Classical pairing `∫ a b dx = Σ_n â(n) b̂(−n)`.
pub fn classical_pairing<T: Scalar>(a: &FourierObservable<T>, b: &FourierObservable<T>) -> Complex<T> {
    a.iter().fold(Complex::default(), |acc, (n, c)| acc + c * b.coefficient(-n))
}

/// Quantises an arbitrary continuous observable from its samples on the `2N × 2N` grid
/// `x_j = (j1, j2)/(2N)`.
///
/// Since `T_N(n)` depends only on `n mod 2N`, `Op_N[b]` is determined by the periodised
/// coefficients `Σ_k b̂(n + 2Nk)`, which are exactly the DFT of these samples. The result equals
/// `Σ_n b̂(n) T_N(n)` for any `b` with absolutely summable Fourier series; no mode truncation.
pub fn quantize_samples(dim: usize, sample: impl Fn(f64, f64) -> f64 + Sync) -> TorusOperator {
    use rayon::prelude::*;
    let k = 2 * dim;
    let grid: Vec<f64> = (0..k * k)
        .into_par_iter()
        .map(|idx| {
            let (j1, j2) = (idx / k, idx % k);
            sample(j1 as f64 / k as f64, j2 as f64 / k as f64)
        })
        .collect();
    quantize_grid(dim, &grid)
}

/// As [`quantize_samples`], taking samples laid out as `grid[j1 * 2N + j2]`.
pub fn quantize_grid(dim: usize, grid: &[f64]) -> TorusOperator {
    let k = 2 * dim;
    assert_eq!(grid.len(), k * k, "grid must be 2N × 2N");
    let fft = FftPlanner::<f64>::new().plan_fft_forward(k);
    // transformed[m][n1] = (1/2N) Σ_{j1} b(j1, m) e(−n1 j1 / 2N)
    let mut transformed = vec![C64::new(0.0, 0.0); k * k];
    for m in 0..k {
        let row = &mut transformed[m * k..(m + 1) * k];
        for (j1, slot) in row.iter_mut().enumerate() {
            *slot = C64::new(grid[j1 * k + m] / k as f64, 0.0);
        }
        fft.process(row);
    }
    let mut op = TorusOperator::zeros(dim);
    let mat = op.mat_mut();
    for n1 in 0..k {
        for q in 0..dim {
            let m = (2 * q + n1) % k;
            mat[(q, (q + n1) % dim)] += transformed[m * k + n1];
        }
    }
    op
}
