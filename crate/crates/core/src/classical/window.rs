//! Smoothing windows for the ergodicity-rate sums.
//!
//! A window is a pair `f(x) = ∫ f̂(s) e(sx) ds` with `f ≥ 0`, `f(0) = 1` and `f̂` supported in
//! `[−1, 1]`. The sums use `f̂(t/T)/T`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    /// `f̂(s) = max(0, 1 − |s|)`, `f(x) = (sin πx / πx)²`.
    #[default]
    Fejer,
    /// `f̂ = (h ∗ h)/ĥ(0)²` for the C^∞ bump `h(s) = exp(−1/(1 − 4s²))` on `(−1/2, 1/2)`,
    /// so `f = (ĥ/ĥ(0))²` decays faster than any power.
    Bump,
}

/// Trapezoid nodes for the bump quadratures; the integrands vanish to all orders at the ends,
/// so the rule converges spectrally.
const BUMP_NODES: usize = 4000;

#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    scale: f64,
    kind: WindowKind,
    bump_norm: f64,
}

fn bump(s: f64) -> f64 {
    let u = 1.0 - 4.0 * s * s;
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// `ĥ(x) = ∫ h(s) cos(2π s x) ds` over `[−1/2, 1/2]`.
fn bump_transform(x: f64) -> f64 {
    let h = 1.0 / BUMP_NODES as f64;
    (1..BUMP_NODES)
        .map(|k| {
            let s = -0.5 + k as f64 * h;
            bump(s) * (2.0 * PI * s * x).cos()
        })
        .sum::<f64>()
        * h
}

/// `(h ∗ h)(s)`.
fn bump_autoconvolution(s: f64) -> f64 {
    let s = s.abs();
    if s >= 1.0 {
        return 0.0;
    }
    let (lo, hi) = (s - 0.5, 0.5);
    let h = (hi - lo) / BUMP_NODES as f64;
    (1..BUMP_NODES)
        .map(|k| {
            let u = lo + k as f64 * h;
            bump(u) * bump(s - u)
        })
        .sum::<f64>()
        * h
}

impl Window {
    pub fn new(scale: f64, kind: WindowKind) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Window(format!("window scale must be positive, got {scale}")));
        }
        let bump_norm = match kind {
            WindowKind::Fejer => 1.0,
            WindowKind::Bump => bump_transform(0.0),
        };
        Ok(Window { scale, kind, bump_norm })
    }

    pub fn fejer(scale: f64) -> Result<Self> {
        Window::new(scale, WindowKind::Fejer)
    }

    pub fn bump(scale: f64) -> Result<Self> {
        Window::new(scale, WindowKind::Bump)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    /// `f̂(s)`.
    pub fn f_hat(&self, s: f64) -> f64 {
        match self.kind {
            WindowKind::Fejer => (1.0 - s.abs()).max(0.0),
            WindowKind::Bump => bump_autoconvolution(s) / (self.bump_norm * self.bump_norm),
        }
    }

    /// `f(x)`.
    pub fn f(&self, x: f64) -> f64 {
        match self.kind {
            WindowKind::Fejer => {
                if x == 0.0 {
                    1.0
                } else {
                    let y = PI * x;
                    (y.sin() / y).powi(2)
                }
            }
            WindowKind::Bump => {
                let r = bump_transform(x) / self.bump_norm;
                r * r
            }
        }
    }

    /// Weight `f̂(t/T)/T` of integer time `t`.
    pub fn weight(&self, t: i64) -> f64 {
        self.f_hat(t as f64 / self.scale) / self.scale
    }

    /// Largest `|t|` with a nonzero weight.
    pub fn support(&self) -> i64 {
        let t = self.scale.ceil() as i64;
        if self.weight(t) > 0.0 {
            t
        } else {
            t - 1
        }
    }

    /// `|f(x) − ∫ f̂(s) e(sx) ds|`, with the integral done by composite Simpson on `[−1, 1]`.
    pub fn fourier_pair_defect(&self, x: f64) -> f64 {
        // Simpson on [0, 1] for the even integrand; the Fejér kink sits at the endpoint
        let n = 20_000;
        let h = 1.0 / n as f64;
        let g = |s: f64| self.f_hat(s) * (2.0 * PI * s * x).cos();
        let mut acc = g(0.0) + g(1.0);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * g(k as f64 * h);
        }
        let integral = 2.0 * acc * h / 3.0;
        (self.f(x) - integral).abs()
    }

    /// Check the three properties the rate argument needs, plus the Fourier-pair identity.
    pub fn check_properties(&self) -> Result<()> {
        if (self.f(0.0) - 1.0).abs() > 1e-12 {
            return Err(Error::Window(format!("f(0) = {} ≠ 1", self.f(0.0))));
        }
        for k in 0..=400 {
            let x = k as f64 * 0.0625;
            if self.f(x) < 0.0 {
                return Err(Error::Window(format!("f({x}) < 0")));
            }
        }
        for s in [1.0, 1.0 + 1e-9, 1.5, 2.0, -1.25] {
            if self.f_hat(s) != 0.0 {
                return Err(Error::Window(format!("f̂({s}) ≠ 0 outside [−1, 1]")));
            }
        }
        for x in [0.0, 0.5, 1.5] {
            let d = self.fourier_pair_defect(x);
            if d > 1e-8 {
                return Err(Error::Window(format!("Fourier pair identity fails at x = {x}: defect {d:e}")));
            }
        }
        Ok(())
    }

    /// Poisson side `Σ_n f(T(β − n))` of the windowed sum of `e(βt)`.
    ///
    /// Fejér uses `sin²(y) = (1 − cos 2y)/2` with the closed form
    /// `Σ_n (β − n)^{−2} = π²/sin²(πβ)` for the non-oscillating half; for non-integer `T` the
    /// oscillating half has an `O(K^{−2})` tail and is summed directly. The bump series is summed until its
    /// terms vanish.
    pub fn poisson_side(&self, beta: f64) -> f64 {
        let t = self.scale;
        let b = beta - beta.round();
        match self.kind {
            WindowKind::Fejer => {
                if b == 0.0 {
                    // f(0) = 1; the remaining terms are sin²(πTn)/(πTn)²
                    let mut acc = 1.0;
                    for n in 1..2_000_000i64 {
                        let y = PI * t * n as f64;
                        acc += 2.0 * (y.sin() / y).powi(2);
                    }
                    return acc;
                }
                let smooth = 1.0 / ((PI * b).sin().powi(2) * t * t);
                if t.fract() == 0.0 {
                    // sin²(πT(β − n)) = sin²(πTβ) for integer T
                    return (PI * t * b).sin().powi(2) * smooth;
                }
                let mut osc = 0.0;
                let k = 200_000i64;
                for n in -k..=k {
                    let d = b - n as f64;
                    osc += (2.0 * PI * t * d).cos() / (d * d);
                }
                0.5 * smooth - osc / (2.0 * PI * PI * t * t)
            }
            WindowKind::Bump => {
                let mut acc = self.f(t * b);
                let mut n = 1i64;
                loop {
                    let term = self.f(t * (b - n as f64)) + self.f(t * (b + n as f64));
                    acc += term;
                    if term < 1e-18 * acc.max(1e-300) || n > 100_000 {
                        break;
                    }
                    n += 1;
                }
                acc
            }
        }
    }
}
