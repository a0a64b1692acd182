//! Unit phases `e(x) = exp(2πix)` and `e_N(x) = e(x/N)`.

use num_complex::Complex;

use crate::scalar::Scalar;
use crate::C64;

/// `e(x) = exp(2πi x)`; the argument is reduced mod 1 first so large `x` keep full precision.
pub fn e<T: Scalar>(x: T) -> Complex<T> {
    let r = x - x.round();
    Complex::from_polar(T::one(), T::TAU() * r)
}

/// `e_N(x) = exp(2πi x / N)`.
pub fn e_n<T: Scalar>(n: usize, x: T) -> Complex<T> {
    let nn = T::from_f64(n as f64);
    // reduce mod N before dividing
    let r = x - (x / nn).floor() * nn;
    e(r / nn)
}

/// `exp(2πi num/den)` with the numerator reduced exactly in integer arithmetic.
pub fn e_frac(num: i128, den: u64) -> C64 {
    let d = den as i128;
    let k = num.rem_euclid(d);
    e(k as f64 / den as f64)
}

/// Table of the `den`-th roots of unity, `table[k] = exp(2πi k/den)`.
#[derive(Clone, Debug)]
pub struct RootTable {
    den: u64,
    roots: Vec<C64>,
}

impl RootTable {
    pub fn new(den: u64) -> Self {
        let roots = (0..den).map(|k| e(k as f64 / den as f64)).collect();
        RootTable { den, roots }
    }

    #[inline]
    pub fn get(&self, num: i128) -> C64 {
        self.roots[num.rem_euclid(self.den as i128) as usize]
    }

    pub fn den(&self) -> u64 {
        self.den
    }
}

/// The value `e_N(x)` for a given Hilbert-space dimension, kept as a value type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModularPhase {
    pub n: usize,
    pub x: f64,
}

impl ModularPhase {
    pub fn new(n: usize, x: f64) -> Self {
        ModularPhase { n, x }
    }

    pub fn value(&self) -> C64 {
        e_n(self.n, self.x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quarter_turn() {
        let z = e(0.25f64);
        assert!((z.re).abs() < 1e-15 && (z.im - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frac_matches_float() {
        for num in [-17i128, -1, 0, 3, 8, 1_000_003] {
            let a = e_frac(num, 8);
            let b = e(num as f64 / 8.0);
            assert!((a - b).norm() < 1e-12);
        }
        let t = RootTable::new(10);
        assert!((t.get(-3) - e_frac(7, 10)).norm() < 1e-15);
    }

    #[test]
    fn f32_phase() {
        let z = e(0.5f32);
        assert!((z.re + 1.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn unit_modulus_and_period(n in 1usize..200, x in -1.0e4f64..1.0e4) {
            let p = ModularPhase::new(n, x).value();
            prop_assert!((p.norm() - 1.0).abs() < 1e-13);
            let shifted = e_n(n, x + n as f64);
            prop_assert!((shifted - p).norm() < 1e-9);
            prop_assert!((e(x + 1.0) - e(x)).norm() < 1e-9);
        }
    }
}
