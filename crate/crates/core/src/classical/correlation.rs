//! Autocorrelations `C[a](t) = ∫ a · (a ∘ Φ^t) dx − ā²` and their windowed sums.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::map::TorusMap;
use super::window::Window;
use crate::algebra::{FourierObservable, LatticeVector};
use crate::error::{Error, Result};
use crate::phase::e;
use crate::scalar::Scalar;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationMethod {
    ExactFourier,
    MonteCarlo,
}

impl CorrelationMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CorrelationMethod::ExactFourier => "exact-fourier",
            CorrelationMethod::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSeries {
    pub values: BTreeMap<i64, C64>,
    pub method: CorrelationMethod,
    /// Grid side `M` for sampled series.
    pub grid: Option<usize>,
    /// Quoted absolute error per value (zero for exact series).
    pub error: f64,
}

impl CorrelationSeries {
    pub fn new(method: CorrelationMethod) -> Self {
        CorrelationSeries { values: BTreeMap::new(), method, grid: None, error: 0.0 }
    }

    pub fn get(&self, t: i64) -> Option<C64> {
        self.values.get(&t).copied()
    }

    pub fn insert(&mut self, t: i64, value: C64) {
        self.values.insert(t, value);
    }

    /// Exact series for `|t| ≤ t_max`.
    pub fn exact<T: Scalar>(map: &TorusMap<T>, a: &FourierObservable<T>, t_max: i64) -> Result<Self> {
        let mut s = CorrelationSeries::new(CorrelationMethod::ExactFourier);
        for t in -t_max..=t_max {
            let c = autocorrelation_exact(map, a, t)?;
            s.insert(t, C64::new(Scalar::to_f64(c.re), Scalar::to_f64(c.im)));
        }
        Ok(s)
    }

    /// Grid-sampled series for `t ∈ [t_min, t_max]`.
    pub fn sampled<T: Scalar>(
        map: &TorusMap<T>,
        a: &FourierObservable<T>,
        t_min: i64,
        t_max: i64,
        grid: usize,
    ) -> Result<Self> {
        let times: Vec<i64> = (t_min..=t_max).collect();
        let est = autocorrelation_sampled_many(map, a, &times, grid)?;
        let mut s = CorrelationSeries::new(CorrelationMethod::MonteCarlo);
        s.grid = Some(grid);
        for (t, v) in times.into_iter().zip(est) {
            s.error = s.error.max(v.error);
            s.insert(t, C64::new(v.value, 0.0));
        }
        Ok(s)
    }

    /// CSV with header `t,re,im,method,T_window`.
    pub fn to_csv(&self, window_scale: Option<f64>) -> String {
        let mut out = String::from("t,re,im,method,T_window\n");
        let w = window_scale.map(|t| format!("{t}")).unwrap_or_default();
        for (t, c) in &self.values {
            let _ = writeln!(out, "{t},{:.17e},{:.17e},{},{w}", c.re, c.im, self.method.as_str());
        }
        out
    }
}

fn apply_transpose_power(n: LatticeVector, m: [[i64; 2]; 2], t: u64) -> Option<LatticeVector> {
    // (Mᵀ)^t n by repeated multiplication; overflow means the image left every finite support
    let mut v = (n.n1 as i128, n.n2 as i128);
    let lim = i64::MAX as i128;
    for _ in 0..t {
        let a = m[0][0] as i128 * v.0 + m[1][0] as i128 * v.1;
        let b = m[0][1] as i128 * v.0 + m[1][1] as i128 * v.1;
        if a.abs() > lim || b.abs() > lim {
            return None;
        }
        v = (a, b);
    }
    Some(LatticeVector::new(v.0 as i64, v.1 as i64))
}

/// Exact centered autocorrelation of `a` under a linear or parabolic map.
///
/// Linear maps: `Σ_n â(n) â(−(Aᵀ)^t n)`. Parabolic:
/// `Σ_m â(−m1 − 2tm2, −m2) â(m) e(m1αt + m2αt(t−1))`.
pub fn autocorrelation_exact<T: Scalar>(map: &TorusMap<T>, a: &FourierObservable<T>, t: i64) -> Result<Complex<T>> {
    let a = a.centered();
    match map {
        TorusMap::Cat(m) => {
            let base = if t < 0 { m.inverse() } else { *m };
            let mut acc = Complex::new(T::zero(), T::zero());
            for (n, c) in a.iter() {
                if let Some(img) = apply_transpose_power(n, base.entries(), t.unsigned_abs()) {
                    acc = acc + c * a.coefficient(-img);
                }
            }
            Ok(acc)
        }
        TorusMap::Parabolic(par) => {
            let tt = T::from_i64(t);
            let k = T::from_f64(t as f64 * (t as f64 - 1.0));
            let mut acc = Complex::new(T::zero(), T::zero());
            for (m, c) in a.iter() {
                let partner = a.coefficient(LatticeVector::new(-m.n1 - 2 * t * m.n2, -m.n2));
                if partner == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                // phase reduced in pieces to keep precision at large t
                let x1 = T::from_i64(m.n1) * tt * par.alpha;
                let x2 = T::from_i64(m.n2) * k * par.alpha;
                let ph = (x1 - x1.round()) + (x2 - x2.round());
                acc = acc + c * partner * e(ph);
            }
            Ok(acc)
        }
        TorusMap::Inverse(inner) => autocorrelation_exact(inner, &a, -t),
        TorusMap::PerturbedCat(_) => {
            Err(Error::Refused("no closed-form correlation for perturbed maps; use the sampled path".into()))
        }
    }
}

/// Grid estimate with its quoted error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampledValue {
    pub value: f64,
    pub error: f64,
}

/// Pairwise (cascade) summation, deterministic and with `O(log n)` error growth.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Centered autocorrelation by averaging `a · (a ∘ Φ^t)` over the `M × M` grid.
///
/// The quoted error `R(a)·‖a − ā‖²/M` is the band-limited quadrature scale; perturbed maps spread
/// `a ∘ Φ^t` over more modes than `a`, so the figure is nominal there.
pub fn autocorrelation_sampled<T: Scalar>(
    map: &TorusMap<T>,
    a: &FourierObservable<T>,
    t: i64,
    grid: usize,
) -> Result<SampledValue> {
    Ok(autocorrelation_sampled_many(map, a, &[t], grid)?[0])
}

pub fn autocorrelation_sampled_many<T: Scalar>(
    map: &TorusMap<T>,
    a: &FourierObservable<T>,
    times: &[i64],
    grid: usize,
) -> Result<Vec<SampledValue>> {
    if grid < 64 {
        return Err(Error::Refused(format!("sampling grid {grid} below the minimum 64")));
    }
    let a = a.centered();
    let error = a.radius() as f64 * Scalar::to_f64(a.parseval()) / grid as f64;
    let mut all = vec![0];
    all.extend_from_slice(times);
    let samples = map.evolved_samples(&a, grid, &all)?;
    let base = &samples[0];
    let m2 = (grid * grid) as f64;
    Ok(samples[1..]
        .iter()
        .map(|evolved| {
            let products: Vec<f64> = base.iter().zip(evolved).map(|(&x, &y)| Scalar::to_f64(x) * Scalar::to_f64(y)).collect();
            let row_sums: Vec<f64> = products.chunks(grid).map(pairwise_sum).collect();
            SampledValue { value: pairwise_sum(&row_sums) / m2, error }
        })
        .collect())
}

/// `Σ_t f̂(t/T)/T · C(t) · e(ε_mod t)` over the window support.
pub fn windowed_ergodicity_sum(series: &CorrelationSeries, window: &Window, modulation: f64) -> Result<C64> {
    let tmax = window.support();
    let mut acc = C64::new(0.0, 0.0);
    for t in -tmax..=tmax {
        let w = window.weight(t);
        if w == 0.0 {
            continue;
        }
        let c = series.get(t).ok_or(Error::MissingSeries(t))?;
        acc += c * w * e(modulation * t as f64);
    }
    Ok(acc)
}

/// `(1/T) Σ_t f̂(t/T) |C(t)|`, the trivial bound on the windowed sum.
pub fn windowed_absolute_sum(series: &CorrelationSeries, window: &Window) -> Result<f64> {
    let tmax = window.support();
    let mut acc = 0.0;
    for t in -tmax..=tmax {
        let c = series.get(t).ok_or(Error::MissingSeries(t))?;
        acc += window.weight(t) * c.norm();
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::map::{CatMatrix, GOLDEN};
    use crate::classical::point::TorusPoint;
    use crate::classical::window::Window;

    fn obs() -> FourierObservable<f64> {
        FourierObservable::cosine((1, 0), 1.0)
            .add(&FourierObservable::sine((0, 1), 0.5))
            .add(&FourierObservable::cosine((1, 1), 0.25))
            .add(&FourierObservable::cosine((2, -1), 0.2))
            .add(&FourierObservable::constant(0.7))
    }

    #[test]
    fn zero_time_is_parseval() {
        let a = obs();
        let want = a.centered().parseval();
        for map in [TorusMap::cat(CatMatrix::standard()), TorusMap::parabolic(GOLDEN)] {
            let c = autocorrelation_exact(&map, &a, 0).unwrap();
            assert!((c.re - want).abs() < 1e-15 && c.im.abs() < 1e-15);
        }
    }

    #[test]
    fn parabolic_momentum_cosine() {
        let a = FourierObservable::cosine((1, 0), 2.0);
        let map = TorusMap::parabolic(GOLDEN);
        for t in -20..=20 {
            let c = autocorrelation_exact(&map, &a, t).unwrap();
            let want = 2.0 * (std::f64::consts::TAU * GOLDEN * t as f64).cos();
            assert!((c.re - want).abs() < 1e-12 && c.im.abs() < 1e-12);
        }
    }

    #[test]
    fn parabolic_position_cosine_decorrelates() {
        let a = FourierObservable::cosine((0, 1), 2.0);
        let map = TorusMap::parabolic(GOLDEN);
        for t in (-10..=10).filter(|&t| t != 0) {
            assert_eq!(autocorrelation_exact(&map, &a, t).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn exact_cat_matches_direct_quadrature() {
        // independent oracle: the cat map sends dyadic grids to themselves, so the grid mean of
        // a · (a ∘ A^t) is the exact integral whenever no aliasing occurs
        let a = obs();
        let map = TorusMap::cat(CatMatrix::new(2, 1, 1, 1).unwrap());
        let m = 64;
        for t in 0..3 {
            let mut acc = 0.0;
            let ac = a.centered();
            for j1 in 0..m {
                for j2 in 0..m {
                    let x = TorusPoint::new(j1 as f64 / m as f64, j2 as f64 / m as f64);
                    let y = map.iterate(x, t).unwrap();
                    acc += ac.eval(x.p(), x.q()) * ac.eval(y.p(), y.q());
                }
            }
            acc /= (m * m) as f64;
            let c = autocorrelation_exact(&map, &a, t).unwrap();
            assert!((c.re - acc).abs() < 1e-12, "t={t}: {} vs {acc}", c.re);
        }
    }

    #[test]
    fn sampled_agrees_with_exact_for_cat() {
        let a = FourierObservable::cosine((1, 0), 1.0)
            .add(&FourierObservable::sine((1, 2), 0.5))
            .add(&FourierObservable::cosine((2, 2), 0.3));
        let map = TorusMap::cat(CatMatrix::new(2, 1, 1, 1).unwrap());
        let m = 128;
        for t in [-3, 0, 1, 2, 5] {
            let s = autocorrelation_sampled(&map, &a, t, m).unwrap();
            let x = autocorrelation_exact(&map, &a, t).unwrap();
            assert!((s.value - x.re).abs() <= 2.0 / m as f64, "t={t}");
            assert!((s.value - x.re).abs() <= s.error);
        }
    }

    #[test]
    fn sampled_constant_is_zero() {
        let map = TorusMap::parabolic(GOLDEN);
        let s = autocorrelation_sampled(&map, &FourierObservable::constant(1.0), 3, 64).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(autocorrelation_sampled(&map, &obs(), 1, 32).is_err());
    }

    #[test]
    fn perturbed_zero_eps_sampled_matches_cat() {
        let a = FourierObservable::cosine((1, 0), 1.0).add(&FourierObservable::cosine((1, 1), 0.5));
        let pc = TorusMap::perturbed_cat(CatMatrix::standard(), FourierObservable::cosine((0, 1), 1.0), 0.0).unwrap();
        let cat = TorusMap::cat(CatMatrix::standard());
        for t in 0..4 {
            let s = autocorrelation_sampled(&pc, &a, t, 64).unwrap();
            let x = autocorrelation_exact(&cat, &a, t).unwrap();
            assert!((s.value - x.re).abs() < 1e-12);
        }
        assert!(matches!(autocorrelation_exact(&pc, &a, 1), Err(Error::Refused(_))));
    }

    #[test]
    fn time_reversal_symmetry() {
        let a = obs();
        for map in [TorusMap::cat(CatMatrix::standard()), TorusMap::parabolic(GOLDEN)] {
            for t in 1..8 {
                let f = autocorrelation_exact(&map, &a, t).unwrap();
                let b = autocorrelation_exact(&map, &a, -t).unwrap();
                assert!((f - b.conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn windowed_single_term() {
        let mut s = CorrelationSeries::new(CorrelationMethod::ExactFourier);
        for t in -10..=10 {
            s.insert(t, C64::new(if t == 0 { 3.0 } else { 0.0 }, 0.0));
        }
        let w = Window::fejer(8.0).unwrap();
        assert!((windowed_ergodicity_sum(&s, &w, 0.0).unwrap() - C64::new(3.0 / 8.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn windowed_sum_matches_poisson_side() {
        for (beta, t) in [(0.5, 2.0), (0.3, 7.0), (0.123, 16.0), (0.3, 2.5), (0.41, 9.75)] {
            let w = Window::fejer(t).unwrap();
            let mut s = CorrelationSeries::new(CorrelationMethod::ExactFourier);
            for k in -20..=20 {
                s.insert(k, e(beta * k as f64));
            }
            let direct = windowed_ergodicity_sum(&s, &w, 0.0).unwrap();
            let poisson = w.poisson_side(beta);
            assert!(direct.im.abs() < 1e-12);
            assert!((direct.re - poisson).abs() < 1e-10, "β={beta} T={t}: {} vs {poisson}", direct.re);
        }
        let w = Window::bump(6.0).unwrap();
        let mut s = CorrelationSeries::new(CorrelationMethod::ExactFourier);
        for k in -8..=8 {
            s.insert(k, e(0.3 * k as f64));
        }
        let direct = windowed_ergodicity_sum(&s, &w, 0.0).unwrap();
        assert!((direct.re - w.poisson_side(0.3)).abs() < 1e-10);
    }

    #[test]
    fn missing_values_are_reported() {
        let mut s = CorrelationSeries::new(CorrelationMethod::ExactFourier);
        s.insert(0, C64::new(1.0, 0.0));
        let w = Window::fejer(3.0).unwrap();
        assert!(matches!(windowed_ergodicity_sum(&s, &w, 0.0), Err(Error::MissingSeries(_))));
    }

    #[test]
    fn windowed_sum_bounded_by_absolute_sum() {
        let a = obs();
        let map = TorusMap::parabolic(GOLDEN);
        let s = CorrelationSeries::exact(&map, &a, 20).unwrap();
        let w = Window::fejer(16.0).unwrap();
        let v = windowed_ergodicity_sum(&s, &w, 0.0).unwrap().norm();
        assert!(v <= windowed_absolute_sum(&s, &w).unwrap() + 1e-15);
    }

    #[test]
    fn csv_export() {
        let mut s = CorrelationSeries::new(CorrelationMethod::MonteCarlo);
        s.insert(-1, C64::new(0.5, 0.0));
        s.insert(2, C64::new(0.25, -1.0));
        let csv = s.to_csv(Some(8.0));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,re,im,method,T_window");
        assert!(lines[1].starts_with("-1,") && lines[1].ends_with(",monte-carlo,8"));
        assert_eq!(lines.len(), 3);
    }
}
