use crate::scalar::Scalar;

/// Point `(p, q)` on T², always stored reduced to `[0, 1)²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint<T: Scalar> {
    p: T,
    q: T,
}

impl<T: Scalar> TorusPoint<T> {
    pub fn new(p: T, q: T) -> Self {
        TorusPoint { p: p.wrap_unit(), q: q.wrap_unit() }
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    /// Max-coordinate distance on the circle.
    pub fn distance(&self, other: &Self) -> T {
        let circ = |a: T, b: T| {
            let d = (a - b).abs();
            d.min(T::one() - d)
        };
        circ(self.p, other.p).max(circ(self.q, other.q))
    }
}

/// Determinant of the finite-difference Jacobian of a torus map at `x` (central differences).
pub fn jacobian_det<T: Scalar>(f: impl Fn(TorusPoint<T>) -> TorusPoint<T>, x: TorusPoint<T>, h: T) -> T {
    // unwrapped difference of two torus coordinates
    let diff = |a: T, b: T| {
        let d = a - b;
        d - d.round()
    };
    let two_h = h + h;
    let pp = f(TorusPoint::new(x.p + h, x.q));
    let pm = f(TorusPoint::new(x.p - h, x.q));
    let qp = f(TorusPoint::new(x.p, x.q + h));
    let qm = f(TorusPoint::new(x.p, x.q - h));
    let dp_dp = diff(pp.p, pm.p) / two_h;
    let dq_dp = diff(pp.q, pm.q) / two_h;
    let dp_dq = diff(qp.p, qm.p) / two_h;
    let dq_dq = diff(qp.q, qm.q) / two_h;
    dp_dp * dq_dq - dp_dq * dq_dp
}
