//! Real observables on the torus held as finite Fourier series.
//!
//! Convention: `a(p, q) = Σ_n â(n) e(n1 p + n2 q)`, i.e. `â(n)` is the coefficient of
//! `e(+n·x)` with `x = (p, q)`. Reality means `â(−n) = conj(â(n))`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex;

use super::lattice::LatticeVector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finite Fourier series on T².
#[derive(Clone, Debug, PartialEq)]
pub struct FourierObservable<T: Scalar> {
    coeffs: BTreeMap<LatticeVector, Complex<T>>,
}

impl<T: Scalar> Default for FourierObservable<T> {
    fn default() -> Self {
        FourierObservable { coeffs: BTreeMap::new() }
    }
}

impl<T: Scalar> FourierObservable<T> {
    /// Builds an observable without checking reality. Zero coefficients are dropped.
    pub fn from_coefficients(iter: impl IntoIterator<Item = (LatticeVector, Complex<T>)>) -> Self {
        let mut coeffs: BTreeMap<LatticeVector, Complex<T>> = BTreeMap::new();
        for (n, c) in iter {
            let slot = coeffs.entry(n).or_default();
            *slot = *slot + c;
        }
        coeffs.retain(|_, c| c.norm_sqr() > T::zero());
        FourierObservable { coeffs }
    }

    /// Builds a real observable, rejecting coefficient sets that violate `â(−n) = conj â(n)`.
    pub fn real(iter: impl IntoIterator<Item = (LatticeVector, Complex<T>)>) -> Result<Self> {
        let obs = Self::from_coefficients(iter);
        obs.check_real(T::from_f64(1e-12))?;
        Ok(obs)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: T) -> Self {
        Self::from_coefficients([(LatticeVector::ZERO, Complex::new(c, T::zero()))])
    }

    /// `amp · cos(2π n·x)`.
    pub fn cosine(n: impl Into<LatticeVector>, amp: T) -> Self {
        let n = n.into();
        if n.is_zero() {
            return Self::constant(amp);
        }
        let half = amp / T::from_f64(2.0);
        Self::from_coefficients([(n, Complex::new(half, T::zero())), (-n, Complex::new(half, T::zero()))])
    }

    /// `amp · sin(2π n·x)`.
    pub fn sine(n: impl Into<LatticeVector>, amp: T) -> Self {
        let n = n.into();
        let half = amp / T::from_f64(2.0);
        // sin θ = (e^{iθ} − e^{−iθ}) / 2i
        Self::from_coefficients([(n, Complex::new(T::zero(), -half)), (-n, Complex::new(T::zero(), half))])
    }

    pub fn coefficient(&self, n: LatticeVector) -> Complex<T> {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LatticeVector, Complex<T>)> + '_ {
        self.coeffs.iter().map(|(n, c)| (*n, *c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Phase-space mean `ā = â(0)`.
    pub fn mean(&self) -> Complex<T> {
        self.coefficient(LatticeVector::ZERO)
    }

    /// Support radius `max |n|∞` over stored coefficients.
    pub fn radius(&self) -> i64 {
        self.coeffs.keys().map(|n| n.norm_inf()).max().unwrap_or(0)
    }

    /// `Σ_n |â(n)|²`, the squared L² norm.
    pub fn parseval(&self) -> T {
        self.coeffs.values().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    /// Observable with the mean removed.
    pub fn centered(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.remove(&LatticeVector::ZERO);
        out
    }

    /// Depends on `p` only (every mode has `n2 = 0`).
    pub fn is_momentum_only(&self) -> bool {
        self.coeffs.keys().all(|n| n.n2 == 0)
    }

    /// Largest violation of `â(−n) = conj â(n)`.
    pub fn reality_defect(&self) -> T {
        self.coeffs
            .iter()
            .map(|(n, c)| (*c - self.coefficient(-*n).conj()).norm())
            .fold(T::zero(), T::max)
    }

    pub fn check_real(&self, tol: T) -> Result<()> {
        for (n, c) in &self.coeffs {
            let d = (*c - self.coefficient(-*n).conj()).norm();
            if d > tol {
                return Err(Error::NotReal { n1: n.n1, n2: n.n2, defect: d.to_f64() });
            }
        }
        Ok(())
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_coefficients(self.iter().map(|(n, c)| (n, c * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_coefficients(self.iter().chain(other.iter()))
    }

    /// Complex-valued point evaluation `Σ â(n) e(n·x)`.
    pub fn eval_complex(&self, p: T, q: T) -> Complex<T> {
        self.iter().fold(Complex::default(), |acc, (n, c)| {
            acc + c * crate::phase::e(T::from_i64(n.n1) * p + T::from_i64(n.n2) * q)
        })
    }

    /// Real part of the point value (the value itself for real observables).
    pub fn eval(&self, p: T, q: T) -> T {
        self.eval_complex(p, q).re
    }

    /// Analytic gradient `(∂a/∂p, ∂a/∂q)` of the real part.
    pub fn gradient(&self, p: T, q: T) -> (T, T) {
        let tau = T::TAU();
        let mut gp = T::zero();
        let mut gq = T::zero();
        for (n, c) in self.iter() {
            // d/dx e(n·x) = 2πi n e(n·x)
            let z = c * crate::phase::e(T::from_i64(n.n1) * p + T::from_i64(n.n2) * q);
            let iz = Complex::new(-z.im, z.re);
            gp = gp + (iz * (tau * T::from_i64(n.n1))).re;
            gq = gq + (iz * (tau * T::from_i64(n.n2))).re;
        }
        (gp, gq)
    }

    /// Converts the coefficient type, e.g. `f32` → `f64`.
    pub fn cast<U: Scalar>(&self) -> FourierObservable<U> {
        FourierObservable::from_coefficients(
            self.iter().map(|(n, c)| (n, Complex::new(U::from_f64(c.re.to_f64()), U::from_f64(c.im.to_f64())))),
        )
    }

    /// Parses `n1 n2 re im` lines; `#` starts a comment. Reality is validated.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut modes = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Parse { line: i + 1, msg: format!("expected 4 fields, found {}", fields.len()) });
            }
            let int = |s: &str| s.parse::<i64>().map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() });
            let real = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() });
            let n = LatticeVector::new(int(fields[0])?, int(fields[1])?);
            let c = Complex::new(T::from_f64(real(fields[2])?), T::from_f64(real(fields[3])?));
            modes.push((n, c));
        }
        Self::real(modes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_text(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (n, c) in self.iter() {
            let _ = writeln!(s, "{} {} {:e} {:e}", n.n1, n.n2, c.re.to_f64(), c.im.to_f64());
        }
        s
    }
}
