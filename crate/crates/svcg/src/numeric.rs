//! Shared numeric tolerances and a compact double-double type.
//!
//! The closed-form bounds divide by `2^(-d/(d+1)) * (1 + rho) - rho`, which
//! nearly cancels as `rho` approaches the admissible limit. Those bounds are
//! therefore evaluated in double-double arithmetic (~106-bit mantissa) and
//! rounded to `f64` at the end.

/// Global relative tolerance for equality assertions.
pub const REL_TOL: f64 = 1e-9;

/// Relative closeness: `|a - b| <= tol * max(|a|, |b|)`, exact equality
/// included so that `0 == 0` passes.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_positive(self) -> bool {
        self.hi > 0.0 || (self.hi == 0.0 && self.lo > 0.0)
    }

    pub fn add(self, rhs: Dd) -> Self {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, rhs: Dd) -> Self {
        self.add(rhs.neg())
    }

    pub fn mul(self, rhs: Dd) -> Self {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub fn div(self, rhs: Dd) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self.sub(rhs.mul(Dd::from_f64(q1)));
        let q2 = r.hi / rhs.hi;
        let r = r.sub(rhs.mul(Dd::from_f64(q2)));
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }

    pub fn recip(self) -> Self {
        Dd::from_f64(1.0).div(self)
    }

    /// Non-negative integer power by repeated multiplication (exponents here
    /// never exceed the maximum polynomial degree plus one).
    pub fn powi(self, n: usize) -> Self {
        let mut acc = Dd::from_f64(1.0);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }
}

/// `2^(1/k)` in double-double precision: Newton iterations on `x^k = 2`
/// starting from the `f64` seed.
pub(crate) fn root_of_two(k: usize) -> Dd {
    assert!(k >= 1);
    let mut x = Dd::from_f64(2f64.powf(1.0 / k as f64));
    let two = Dd::from_f64(2.0);
    let kf = Dd::from_f64(k as f64);
    for _ in 0..3 {
        let xk1 = x.powi(k - 1);
        let f = xk1.mul(x).sub(two);
        x = x.sub(f.div(kf.mul(xk1)));
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rel_close_basics() {
        assert!(rel_close(0.0, 0.0, REL_TOL));
        assert!(rel_close(1.0, 1.0 + 5e-10, REL_TOL));
        assert!(!rel_close(1.0, 1.0 + 5e-9, REL_TOL));
        assert!(rel_close(1e12, 1e12 * (1.0 + 1e-10), REL_TOL));
    }

    #[test]
    fn dd_sqrt2_squares_to_two() {
        let r = root_of_two(2);
        let sq = r.mul(r).sub(Dd::from_f64(2.0));
        assert!(sq.value().abs() < 1e-30, "residual {}", sq.value());
    }

    #[test]
    fn dd_division_roundtrip() {
        let a = Dd::from_f64(3.0).div(Dd::from_f64(7.0));
        let b = a.mul(Dd::from_f64(7.0)).sub(Dd::from_f64(3.0));
        assert!(b.value().abs() < 1e-31);
    }

    #[test]
    fn dd_root_matches_f64_seed() {
        for k in 1..=9 {
            let r = root_of_two(k).value();
            let seed = 2f64.powf(1.0 / k as f64);
            assert!((r - seed).abs() <= 4.0 * f64::EPSILON * seed);
        }
    }
}
