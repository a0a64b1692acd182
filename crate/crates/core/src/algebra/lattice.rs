use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Integer lattice vector `n = (n1, n2)`; `n1` pairs with momentum `p`, `n2` with position `q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVector {
    pub n1: i64,
    pub n2: i64,
}

impl LatticeVector {
    pub const ZERO: LatticeVector = LatticeVector { n1: 0, n2: 0 };

    pub const fn new(n1: i64, n2: i64) -> Self {
        LatticeVector { n1, n2 }
    }

    /// Symplectic form `ω(m, n) = m1 n2 − m2 n1`.
    pub fn omega(self, other: LatticeVector) -> i64 {
        self.n1 * other.n2 - self.n2 * other.n1
    }

    pub fn norm_inf(self) -> i64 {
        self.n1.abs().max(self.n2.abs())
    }

    pub fn is_zero(self) -> bool {
        self.n1 == 0 && self.n2 == 0
    }

    /// True when both components vanish mod `n`.
    pub fn is_zero_mod(self, n: usize) -> bool {
        let n = n as i64;
        self.n1.rem_euclid(n) == 0 && self.n2.rem_euclid(n) == 0
    }

    /// `M · n` for a 2×2 integer matrix given row-major.
    pub fn transform(self, m: [[i64; 2]; 2]) -> LatticeVector {
        LatticeVector::new(
            m[0][0] * self.n1 + m[0][1] * self.n2,
            m[1][0] * self.n1 + m[1][1] * self.n2,
        )
    }
}

impl Add for LatticeVector {
    type Output = LatticeVector;
    fn add(self, o: LatticeVector) -> LatticeVector {
        LatticeVector::new(self.n1 + o.n1, self.n2 + o.n2)
    }
}

impl Sub for LatticeVector {
    type Output = LatticeVector;
    fn sub(self, o: LatticeVector) -> LatticeVector {
        LatticeVector::new(self.n1 - o.n1, self.n2 - o.n2)
    }
}

impl Neg for LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector::new(-self.n1, -self.n2)
    }
}

impl From<(i64, i64)> for LatticeVector {
    fn from((n1, n2): (i64, i64)) -> Self {
        LatticeVector::new(n1, n2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lv() -> impl Strategy<Value = LatticeVector> {
        (-1000i64..1000, -1000i64..1000).prop_map(|(a, b)| LatticeVector::new(a, b))
    }

    proptest! {
        #[test]
        fn omega_antisymmetric_bilinear(m in lv(), n in lv(), k in lv(), c in -20i64..20) {
            prop_assert_eq!(m.omega(n), -n.omega(m));
            prop_assert_eq!((m + k).omega(n), m.omega(n) + k.omega(n));
            let cm = LatticeVector::new(c * m.n1, c * m.n2);
            prop_assert_eq!(cm.omega(n), c * m.omega(n));
        }
    }

    #[test]
    fn zero_mod() {
        assert!(LatticeVector::new(10, -5).is_zero_mod(5));
        assert!(!LatticeVector::new(10, -4).is_zero_mod(5));
    }
}
