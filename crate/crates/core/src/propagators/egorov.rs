//! Egorov defects `‖U^{−t} Op[a] U^t − Op[a ∘ Φ^t]‖` and growth fits.

use std::collections::BTreeMap;

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::propagator::Propagator;
use crate::algebra::{operator_norm, quantize_grid, translation_operator, FourierObservable, LatticeVector, TorusOperator};
use crate::classical::{linear_regression, CatMatrix, TorusMap};
use crate::error::{Error, Result};
use crate::phase::e;
use crate::C64;

/// Defects at or below this are treated as exact Egorov.
pub const EXACT_EGOROV_TOL: f64 = 1e-9;

/// Outcome of checking `M* T(n) M = phase · T(image(n))` over a box of modes.
#[derive(Clone, Debug)]
pub struct TransportReport {
    pub max_defect: f64,
    /// Largest `||phase| − 1|`.
    pub max_phase_error: f64,
    pub phases: Vec<(LatticeVector, C64)>,
}

/// Check that conjugation by `op` sends every `T(n)`, `|n|∞ ≤ radius`, to a unit phase times
/// `T(image(n))`. The phase is read off as `(1/N) Tr(T(image)* M* T(n) M)`.
pub fn transport_defect(op: &TorusOperator, radius: i64, image: impl Fn(LatticeVector) -> LatticeVector) -> TransportReport {
    let n = op.dim();
    let adj = op.adjoint();
    let mut report = TransportReport { max_defect: 0.0, max_phase_error: 0.0, phases: Vec::new() };
    for n1 in -radius..=radius {
        for n2 in -radius..=radius {
            let v = LatticeVector::new(n1, n2);
            let lhs = &(&adj * &translation_operator(n, v)) * op;
            let target = translation_operator(n, image(v));
            let phase = (&target.adjoint() * &lhs).trace() / n as f64;
            let defect = (&lhs - &target.scale(phase)).max_abs();
            report.max_defect = report.max_defect.max(defect);
            report.max_phase_error = report.max_phase_error.max((phase.norm() - 1.0).abs());
            report.phases.push((v, phase));
        }
    }
    report
}

/// Exact Egorov check for the classical linear map `A`: `T(n) ↦ phase · T(Aᵀ n)`.
pub fn exact_egorov_defect(op: &TorusOperator, a: CatMatrix, radius: i64) -> Result<TransportReport> {
    let b = a.transpose().entries();
    Ok(transport_defect(op, radius, |v| v.transform(b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PushforwardMethod {
    ModeTransport,
    GridSampling,
}

/// `Op_N[a ∘ Φ^t]` with diagnostics.
#[derive(Clone, Debug)]
pub struct Pushforward {
    pub t: i64,
    pub op: TorusOperator,
    pub method: PushforwardMethod,
    /// Fourier radius of `a ∘ Φ^t` (saturating); for sampled pushforwards, the smallest box
    /// holding all but `1e−12` of the energy on the `2N` grid.
    pub radius: i64,
    /// Energy of the sampled symbol in the outer half of the `2N` grid band (zero for exact
    /// transport). The quantisation uses all of it exactly; large values mean the symbol is
    /// not resolved at this `N`.
    pub band_edge_energy: f64,
}

fn transported_modes(map: &TorusMap<f64>, a: &FourierObservable<f64>, t: i64) -> Option<Vec<(LatticeVector, C64, i64)>> {
    match map {
        TorusMap::Cat(m) => {
            let base = if t < 0 { m.inverse() } else { *m };
            let bt = base.transpose().entries();
            Some(
                a.iter()
                    .map(|(v, c)| {
                        // exact image reduced mod 2N happens at quantisation; keep the true
                        // vector when it fits, saturating the reported radius otherwise
                        let mut w = (v.n1 as i128, v.n2 as i128);
                        let mut overflow = false;
                        for _ in 0..t.unsigned_abs() {
                            w = (bt[0][0] as i128 * w.0 + bt[0][1] as i128 * w.1, bt[1][0] as i128 * w.0 + bt[1][1] as i128 * w.1);
                            if w.0.abs() > (1i128 << 60) || w.1.abs() > (1i128 << 60) {
                                overflow = true;
                                break;
                            }
                        }
                        let radius = if overflow { i64::MAX } else { w.0.abs().max(w.1.abs()) as i64 };
                        (if overflow { v } else { LatticeVector::new(w.0 as i64, w.1 as i64) }, c, radius)
                    })
                    .collect(),
            )
        }
        TorusMap::Parabolic(par) => {
            let k = t as f64 * (t as f64 - 1.0);
            Some(
                a.iter()
                    .map(|(m, c)| {
                        let img = LatticeVector::new(m.n1 + 2 * t * m.n2, m.n2);
                        let x1 = m.n1 as f64 * t as f64 * par.alpha;
                        let x2 = m.n2 as f64 * k * par.alpha;
                        let ph = e((x1 - x1.round()) + (x2 - x2.round()));
                        (img, c * ph, img.norm_inf())
                    })
                    .collect(),
            )
        }
        TorusMap::Inverse(inner) => transported_modes(inner, a, -t),
        TorusMap::PerturbedCat(_) => None,
    }
}

/// Modular image `(Aᵀ)^t n mod 2N`, used when the true vector overflows.
fn cat_image_mod(m: CatMatrix, t: i64, v: LatticeVector, modulus: i64) -> LatticeVector {
    let base = if t < 0 { m.inverse() } else { m };
    let bt = base.transpose().entries();
    let md = modulus as i128;
    let (mut x, mut y) = ((v.n1 as i128).rem_euclid(md), (v.n2 as i128).rem_euclid(md));
    for _ in 0..t.unsigned_abs() {
        let nx = (bt[0][0] as i128 * x + bt[0][1] as i128 * y).rem_euclid(md);
        let ny = (bt[1][0] as i128 * x + bt[1][1] as i128 * y).rem_euclid(md);
        x = nx;
        y = ny;
    }
    LatticeVector::new(x as i64, y as i64)
}

fn innermost_cat(map: &TorusMap<f64>, t: i64) -> Option<(CatMatrix, i64)> {
    match map {
        TorusMap::Cat(m) => Some((*m, t)),
        TorusMap::Inverse(inner) => innermost_cat(inner, -t),
        _ => None,
    }
}

/// Energy diagnostics of a `k × k` real sample grid: (radius holding all but `1e−12` of the
/// energy, energy with some index in the outer half band).
fn spectral_diagnostics(samples: &[f64], k: usize) -> (i64, f64) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(k);
    let mut buf: Vec<C64> = samples.iter().map(|&x| Complex::new(x / (k * k) as f64, 0.0)).collect();
    for row in buf.chunks_mut(k) {
        fft.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); k];
    for j in 0..k {
        for i in 0..k {
            col[i] = buf[i * k + j];
        }
        fft.process(&mut col);
        for i in 0..k {
            buf[i * k + j] = col[i];
        }
    }
    let signed = |i: usize| if i <= k / 2 { i as i64 } else { i as i64 - k as i64 };
    let half = (k / 2) as i64;
    let mut by_radius = vec![0.0; half as usize + 1];
    let mut edge = 0.0;
    for i in 0..k {
        for j in 0..k {
            let r = signed(i).abs().max(signed(j).abs());
            let en = buf[i * k + j].norm_sqr();
            by_radius[r as usize] += en;
            if r > half / 2 {
                edge += en;
            }
        }
    }
    let total: f64 = by_radius.iter().sum();
    let mut tail = total;
    let mut radius = half;
    for (r, en) in by_radius.iter().enumerate() {
        tail -= en;
        if tail <= 1e-12 * total.max(f64::MIN_POSITIVE) {
            radius = r as i64;
            break;
        }
    }
    (radius, edge)
}

/// `Op_N[a ∘ Φ^t]` for each requested time.
///
/// Linear and parabolic maps transport Fourier modes exactly. Perturbed maps sample `a ∘ Φ^t`
/// on the `2N × 2N` grid; since `T_N(n)` is `2N`-periodic in `n`, quantising those samples
/// reproduces `Σ_n (a∘Φ^t)^(n) T_N(n)` exactly, with no truncation of the mode sum.
pub fn pushforward_many(n: usize, a: &FourierObservable<f64>, map: &TorusMap<f64>, times: &[i64]) -> Result<Vec<Pushforward>> {
    if map.is_exact() {
        return times
            .iter()
            .map(|&t| {
                let modes = transported_modes(map, a, t).expect("exact maps transport modes");
                let cat = innermost_cat(map, t);
                let mut radius = 0;
                let coeffs: Vec<(LatticeVector, C64)> = a
                    .iter()
                    .zip(modes)
                    .map(|((v, _), (img, c, r))| {
                        radius = radius.max(r);
                        let img = match cat {
                            Some((m, tt)) if r == i64::MAX => cat_image_mod(m, tt, v, 2 * n as i64),
                            _ => img,
                        };
                        (img, c)
                    })
                    .collect();
                let op = crate::algebra::weyl_quantize(n, &FourierObservable::from_coefficients(coeffs));
                Ok(Pushforward { t, op, method: PushforwardMethod::ModeTransport, radius, band_edge_energy: 0.0 })
            })
            .collect();
    }
    let k = 2 * n;
    let samples = map.evolved_samples(a, k, times)?;
    Ok(times
        .iter()
        .zip(samples)
        .map(|(&t, grid)| {
            let (radius, band_edge_energy) = spectral_diagnostics(&grid, k);
            Pushforward { t, op: quantize_grid(n, &grid), method: PushforwardMethod::GridSampling, radius, band_edge_energy }
        })
        .collect())
}

pub fn pushforward(n: usize, a: &FourierObservable<f64>, map: &TorusMap<f64>, t: i64) -> Result<Pushforward> {
    Ok(pushforward_many(n, a, map, &[t])?.remove(0))
}

/// One measured defect with its pushforward diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectRecord {
    pub t: i64,
    pub value: f64,
    pub radius: i64,
    pub band_edge_energy: f64,
}

/// `‖U^{−t} Op[a] U^t − Op[a ∘ Φ^t]‖` for every requested time.
pub fn egorov_defects(u: &Propagator, a: &FourierObservable<f64>, map: &TorusMap<f64>, times: &[i64]) -> Result<Vec<DefectRecord>> {
    let n = u.dim();
    let op_a = crate::algebra::weyl_quantize(n, a);
    let pushed = pushforward_many(n, a, map, times)?;
    let adj = u.op.adjoint();

    // Heisenberg operators by repeated conjugation, walking outward from t = 0
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by_key(|&i| (times[i] < 0, times[i].abs()));
    let mut heis: Vec<Option<TorusOperator>> = vec![None; times.len()];
    let (mut fwd, mut fwd_t) = (op_a.clone(), 0i64);
    let (mut bwd, mut bwd_t) = (op_a, 0i64);
    for i in order {
        let t = times[i];
        if t >= 0 {
            while fwd_t < t {
                fwd = &(&adj * &fwd) * &u.op;
                fwd_t += 1;
            }
            heis[i] = Some(fwd.clone());
        } else {
            while bwd_t > t {
                bwd = &(&u.op * &bwd) * &adj;
                bwd_t -= 1;
            }
            heis[i] = Some(bwd.clone());
        }
    }
    heis.into_iter()
        .zip(pushed)
        .map(|(h, p)| {
            let h = h.expect("every time visited");
            let value = operator_norm(&(&h - &p.op));
            Ok(DefectRecord { t: p.t, value, radius: p.radius, band_edge_energy: p.band_edge_energy })
        })
        .collect()
}

pub fn egorov_defect(u: &Propagator, a: &FourierObservable<f64>, map: &TorusMap<f64>, t: i64) -> Result<f64> {
    Ok(egorov_defects(u, a, map, &[t])?[0].value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthModel {
    Exponential,
    Power,
}

/// `defect ≈ constant · g(t) / N` with `g = e^{rate·t}` or `t^{rate}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    pub constant: f64,
    pub rate: f64,
    /// Root-mean-square residual in `ln defect`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EgorovFit {
    pub n: usize,
    pub defects: BTreeMap<i64, f64>,
    /// Every defect is at rounding level; no growth model is fitted.
    pub exact: bool,
    pub exponential: Option<GrowthFit>,
    pub power: Option<GrowthFit>,
    pub preferred: Option<GrowthModel>,
}

impl EgorovFit {
    /// Residual of the power model over the exponential model.
    pub fn residual_ratio(&self) -> Option<f64> {
        Some(self.power?.residual / self.exponential?.residual)
    }
}

/// Fit exponential and power growth to the defects at positive times.
pub fn fit_egorov_growth(defects: &BTreeMap<i64, f64>, n: usize) -> Result<EgorovFit> {
    for (&t, &d) in defects {
        if !(d >= 0.0) {
            return Err(Error::invariant("Egorov defect nonnegative", d, 0.0));
        }
        if t == 0 && d > 1e-12 {
            return Err(Error::invariant("Egorov defect at t = 0", d, 1e-12));
        }
    }
    let mut fit = EgorovFit { n, defects: defects.clone(), exact: false, exponential: None, power: None, preferred: None };
    if defects.values().all(|&d| d <= EXACT_EGOROV_TOL) {
        fit.exact = true;
        return Ok(fit);
    }
    let pts: Vec<(f64, f64)> = defects.iter().filter(|(&t, _)| t > 0).map(|(&t, &d)| (t as f64, d)).collect();
    if pts.len() < 4 {
        return Err(Error::Fit(format!("growth fit needs at least 4 positive times, got {}", pts.len())));
    }
    if let Some(&(t, d)) = pts.iter().find(|p| p.1 <= 0.0) {
        return Err(Error::Fit(format!("defect {d} at t = {t} is not positive")));
    }
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let lts: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let (g, c, r) = linear_regression(&ts, &ys)?;
    fit.exponential = Some(GrowthFit { constant: c.exp() * n as f64, rate: g, residual: r });
    let (k, c, r) = linear_regression(&lts, &ys)?;
    fit.power = Some(GrowthFit { constant: c.exp() * n as f64, rate: k, residual: r });
    let (e, p) = (fit.exponential.unwrap().residual, fit.power.unwrap().residual);
    fit.preferred = Some(if e <= p { GrowthModel::Exponential } else { GrowthModel::Power });
    Ok(fit)
}
