//! Metaplectic quantisation of linear maps by factorisation into theta-group generators.
//!
//! For the classical matrix `A` the propagator satisfies `M* T_N(n) M = T_N(Aᵀ n)` exactly (no
//! phase). `B = Aᵀ` is reduced to the identity by left multiplication with
//! `L^k = [[1,0],[2k,1]]`, `R^k = [[1,2k],[0,1]]`, `S = [[0,−1],[1,0]]` and `−I`, each of which
//! has an explicit quantum counterpart:
//!
//! - `L^k`: `diag(e_N(k q²))`
//! - `S`: inverse unitary DFT, `S⁻¹`: forward unitary DFT
//! - `R^k`: `F_+ diag(e_N(−k q²)) F_−`
//! - `−I`: parity `ψ(q) ↦ ψ(−q)`

use faer::Mat;
use rustfft::FftPlanner;

use super::propagator::{Construction, Propagator};
use crate::algebra::TorusOperator;
use crate::classical::{CatMatrix, TorusMap};
use crate::error::{Error, Result};
use crate::phase::RootTable;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Generator {
    L(i64),
    R(i64),
    S,
    SInv,
    MinusI,
}

impl Generator {
    fn inverse(self) -> Generator {
        match self {
            Generator::L(k) => Generator::L(-k),
            Generator::R(k) => Generator::R(-k),
            Generator::S => Generator::SInv,
            Generator::SInv => Generator::S,
            Generator::MinusI => Generator::MinusI,
        }
    }

    /// `G · [[a,b],[c,d]]`.
    fn left_apply(self, m: [i128; 4]) -> [i128; 4] {
        let [a, b, c, d] = m;
        match self {
            Generator::L(k) => [a, b, c + 2 * k as i128 * a, d + 2 * k as i128 * b],
            Generator::R(k) => [a + 2 * k as i128 * c, b + 2 * k as i128 * d, c, d],
            Generator::S => [-c, -d, a, b],
            Generator::SInv => [c, d, -a, -b],
            Generator::MinusI => [-a, -b, -c, -d],
        }
    }
}

fn round_div(num: i128, den: i128) -> i64 {
    (num as f64 / den as f64).round() as i64
}

/// Generators `G_1, …, G_m` with `G_m ⋯ G_1 B = I`.
fn reduce(b: [i128; 4]) -> Vec<Generator> {
    let mut m = b;
    let mut gens = Vec::new();
    let mut push = |g: Generator, m: &mut [i128; 4]| {
        *m = g.left_apply(*m);
        gens.push(g);
    };
    while m[2] != 0 {
        let (a, c) = (m[0], m[2]);
        let g = if a == 0 {
            Generator::S
        } else if c.abs() > a.abs() {
            Generator::L(round_div(-c, 2 * a))
        } else {
            Generator::R(round_div(-a, 2 * c))
        };
        push(g, &mut m);
    }
    if m[0] == -1 {
        push(Generator::MinusI, &mut m);
    }
    if m[1] != 0 {
        push(Generator::R((-m[1] / 2) as i64), &mut m);
    }
    debug_assert_eq!(m, [1, 0, 0, 1]);
    gens
}

/// Applies generator operators to a dense matrix from the left.
struct Builder {
    n: usize,
    mat: Mat<C64>,
    roots: RootTable,
    planner: FftPlanner<f64>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder { n, mat: Mat::identity(n, n), roots: RootTable::new(n as u64), planner: FftPlanner::new() }
    }

    fn chirp(&mut self, k: i64) {
        let n = self.n;
        for q in 0..n {
            let ph = self.roots.get(k as i128 * (q * q) as i128);
            for j in 0..n {
                self.mat[(q, j)] *= ph;
            }
        }
    }

    fn dft(&mut self, forward: bool) {
        let n = self.n;
        let fft = if forward { self.planner.plan_fft_forward(n) } else { self.planner.plan_fft_inverse(n) };
        let norm = 1.0 / (n as f64).sqrt();
        for j in 0..n {
            let col = self.mat.col_mut(j).try_as_col_major_mut().expect("owned columns are contiguous").as_slice_mut();
            fft.process(col);
            for z in col.iter_mut() {
                *z *= norm;
            }
        }
    }

    fn parity(&mut self) {
        let n = self.n;
        for q in 1..n.div_ceil(2) {
            for j in 0..n {
                let tmp = self.mat[(q, j)];
                self.mat[(q, j)] = self.mat[(n - q, j)];
                self.mat[(n - q, j)] = tmp;
            }
        }
    }

    /// Left-multiply by the quantisation of `g`.
    fn apply(&mut self, g: Generator) {
        match g {
            Generator::L(k) => self.chirp(k),
            Generator::S => self.dft(false),
            Generator::SInv => self.dft(true),
            Generator::R(k) => {
                self.dft(false);
                self.chirp(-k);
                self.dft(true);
            }
            Generator::MinusI => self.parity(),
        }
    }
}

/// Quantisation of the lattice action `B` (`M* T(n) M = T(Bn)`).
pub(crate) fn lattice_metaplectic(n: usize, b: [[i64; 2]; 2]) -> Result<TorusOperator> {
    let m = [b[0][0] as i128, b[0][1] as i128, b[1][0] as i128, b[1][1] as i128];
    let gens = reduce(m);
    let mut builder = Builder::new(n);
    for g in gens {
        builder.apply(g.inverse());
    }
    Ok(TorusOperator::from_mat(builder.mat))
}

/// Metaplectic propagator of the classical linear map `A`.
pub fn metaplectic(n: usize, a: CatMatrix) -> Result<Propagator> {
    if n == 0 {
        return Err(Error::Refused("Hilbert-space dimension must be positive".into()));
    }
    if !a.has_parity() {
        let [[a0, b0], [c0, d0]] = a.entries();
        return Err(Error::Parity { a: a0, b: b0, c: c0, d: d0 });
    }
    let op = lattice_metaplectic(n, a.transpose().entries())?;
    Propagator::checked(op, TorusMap::cat(a), Construction::Metaplectic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::exact_egorov_defect;

    fn cat(a: i64, b: i64, c: i64, d: i64) -> CatMatrix {
        CatMatrix::new(a, b, c, d).unwrap()
    }

    #[test]
    fn reduction_reaches_identity() {
        for m in [[2, 3, 1, 2], [0, 1, -1, 0], [1, 0, 2, 1], [5, 12, 2, 5], [-1, 0, 0, -1], [2, 1, 3, 2]] {
            let b = [m[0] as i128, m[1] as i128, m[2] as i128, m[3] as i128];
            let mut x = b;
            for g in reduce(b) {
                x = g.left_apply(x);
            }
            assert_eq!(x, [1, 0, 0, 1]);
        }
    }

    #[test]
    fn identity_quantises_to_identity() {
        let p = metaplectic(13, cat(1, 0, 0, 1)).unwrap();
        assert!((&p.op - &TorusOperator::identity(13)).max_abs() == 0.0);
    }

    #[test]
    fn quarter_turn_is_a_dft() {
        // classical [[0,−1],[1,0]] has lattice action (n1, n2) ↦ (n2, −n1)
        for n in [8, 13, 32] {
            let p = metaplectic(n, cat(0, -1, 1, 0)).unwrap();
            let d = exact_egorov_defect(&p.op, cat(0, -1, 1, 0), 3).unwrap();
            assert!(d.max_defect < 1e-10);
            // proportional to the unitary DFT matrix
            let scale = (n as f64).sqrt();
            let phase = p.op.get(0, 0) * scale;
            assert!((phase.norm() - 1.0).abs() < 1e-12);
            for q in 0..n {
                for r in 0..n {
                    let want = crate::phase::e_frac(-((q * r) as i128), n as u64) * phase / scale;
                    assert!((p.op.get(q, r) - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lower_shear_lattice_action_is_a_chirp() {
        // lattice action [[1,0],[2,1]] comes from the classical matrix [[1,2],[0,1]]
        let n = 16;
        let p = metaplectic(n, cat(1, 2, 0, 1)).unwrap();
        for q in 0..n {
            for r in 0..n {
                let want = if q == r { crate::phase::e_frac((q * q) as i128, n as u64) } else { C64::new(0.0, 0.0) };
                assert!((p.op.get(q, r) - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn exact_egorov_for_curated_matrices() {
        let mats = [cat(2, 1, 3, 2), cat(2, 3, 1, 2), cat(1, 0, 2, 1), cat(1, 2, 0, 1), cat(0, 1, -1, 0), cat(5, 2, 12, 5)];
        for n in [8, 13, 21, 32, 64] {
            for &a in &mats {
                let p = metaplectic(n, a).unwrap();
                assert!(p.op.unitarity_defect() < 1e-10);
                let d = exact_egorov_defect(&p.op, a, 3).unwrap();
                assert!(d.max_defect < 1e-10, "N={n} A={a}: {}", d.max_defect);
                assert!(d.max_phase_error < 1e-10);
            }
        }
    }

    #[test]
    fn parity_violation_is_rejected() {
        assert!(matches!(metaplectic(8, cat(2, 1, 1, 1)), Err(Error::Parity { .. })));
    }
}
