//! Least-squares fits for decay laws.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerFit<T: Scalar> {
    /// Slope of `ln value` against `ln scale`.
    pub exponent: T,
    /// Intercept of the same regression, i.e. `ln c` in `value ≈ c · scale^exponent`.
    pub intercept: T,
    /// Root-mean-square residual in `ln value`.
    pub residual: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogFit<T: Scalar> {
    /// `c` in `value ≈ c / ln(scale)`.
    pub constant: T,
    /// Root-mean-square relative residual.
    pub residual: T,
}

/// Ordinary least squares `y ≈ slope·x + intercept`; returns `(slope, intercept, rms residual)`.
pub fn linear_regression<T: Scalar>(xs: &[T], ys: &[T]) -> Result<(T, T, T)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Fit(format!("need matching samples, got {} and {}", xs.len(), ys.len())));
    }
    let n = T::from_f64(xs.len() as f64);
    let mx = xs.iter().fold(T::zero(), |s, &x| s + x) / n;
    let my = ys.iter().fold(T::zero(), |s, &y| s + y) / n;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    if sxx == T::zero() {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss = xs.iter().zip(ys).fold(T::zero(), |s, (&x, &y)| {
        let r = y - (slope * x + intercept);
        s + r * r
    });
    Ok((slope, intercept, (ss / n).sqrt()))
}

fn check_points<T: Scalar>(points: &[(T, T)]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    for &(s, v) in points {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::Fit(format!("value {v} at scale {s} is not positive")));
        }
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::Fit(format!("scale {s} is not positive")));
        }
    }
    Ok(())
}

/// Log-log least squares of `value` against `scale`.
pub fn fit_decay_exponent<T: Scalar>(points: &[(T, T)]) -> Result<PowerFit<T>> {
    check_points(points)?;
    let xs: Vec<T> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<T> = points.iter().map(|p| p.1.ln()).collect();
    let (exponent, intercept, residual) = linear_regression(&xs, &ys)?;
    Ok(PowerFit { exponent, intercept, residual })
}

/// Least squares for `value = c / ln(scale)`: `c` minimises `Σ (v_i − c u_i)²` with `u = 1/ln s`.
pub fn fit_logarithmic<T: Scalar>(points: &[(T, T)]) -> Result<LogFit<T>> {
    check_points(points)?;
    let (mut uu, mut uv) = (T::zero(), T::zero());
    for &(s, v) in points {
        if !(s > T::one()) {
            return Err(Error::Fit(format!("scale {s} must exceed 1 for a logarithmic law")));
        }
        let u = T::one() / s.ln();
        uu = uu + u * u;
        uv = uv + u * v;
    }
    let constant = uv / uu;
    let ss = points.iter().fold(T::zero(), |acc, &(s, v)| {
        let r = (v - constant / s.ln()) / v;
        acc + r * r
    });
    let residual = (ss / T::from_f64(points.len() as f64)).sqrt();
    Ok(LogFit { constant, residual })
}
