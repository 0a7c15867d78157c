//! Double-double arithmetic (~31 significant digits).
//!
//! The closed-form Knill-Laflamme oracles mix `cosh(8ξ)`-scale terms that
//! cancel down by six or more decades at ξ = 1.5; plain f64 evaluation leaves
//! absolute errors around 1e-7, above the 1e-8 oracle tolerance. A
//! double-double carries the cancellation losslessly.
//!
//! Representation: value = hi + lo with |lo| <= ulp(hi)/2. Products use the
//! FMA two-product; sums use the two-sum of Knuth/Dekker.

/// Unevaluated sum of two doubles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// ln(2) to double-double precision.
    pub const LN2: Dd = Dd {
        hi: 0.693_147_180_559_945_3,
        lo: 2.319_046_813_846_299_6e-17,
    };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from_f64(q1)));
        let q2 = r.hi / o.hi;
        let r2 = r.sub(o.mul(Dd::from_f64(q2)));
        let q3 = r2.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from_f64(q3))
    }

    #[inline]
    pub fn scale(self, x: f64) -> Dd {
        self.mul(Dd::from_f64(x))
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        // one Newton step on x = sqrt(a): x' = x + (a - x^2)/(2x)
        let x = Dd::from_f64(self.hi.sqrt());
        let corr = self.sub(x.mul(x)).div(x.scale(2.0));
        x.add(corr)
    }

    /// exp with argument reduction x = k ln2 + r, |r| <= ln2/2.
    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / Dd::LN2.hi).round();
        let r = self.sub(Dd::LN2.scale(k));
        // Taylor series on |r| <= 0.35; terms fall below 1e-33 by n ~ 26
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..32 {
            term = term.mul(r).div(Dd::from_f64(n as f64));
            sum = sum.add(term);
            if term.hi.abs() < 1e-35 * sum.hi.abs() {
                break;
            }
        }
        let scale = 2.0f64.powi(k as i32);
        Dd { hi: sum.hi * scale, lo: sum.lo * scale }
    }

    pub fn cosh(self) -> Dd {
        let e = self.exp();
        let ei = Dd::ONE.div(e);
        e.add(ei).scale(0.5)
    }

    pub fn sinh(self) -> Dd {
        if self.hi.abs() < 0.5 {
            // series keeps relative accuracy near zero
            let x2 = self.mul(self);
            let mut term = self;
            let mut sum = self;
            for n in 1..20 {
                let den = ((2 * n) * (2 * n + 1)) as f64;
                term = term.mul(x2).div(Dd::from_f64(den));
                sum = sum.add(term);
                if term.hi.abs() < 1e-35 * sum.hi.abs().max(1e-300) {
                    break;
                }
            }
            return sum;
        }
        let e = self.exp();
        let ei = Dd::ONE.div(e);
        e.sub(ei).scale(0.5)
    }

    pub fn powi(self, n: usize) -> Dd {
        let mut out = Dd::ONE;
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(base);
            }
            base = base.mul(base);
            k >>= 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_identities() {
        let a = Dd::from_f64(1.0).div(Dd::from_f64(3.0));
        let b = a.scale(3.0);
        assert!((b.hi - 1.0).abs() < 1e-30 && b.lo.abs() < 1e-16);
        let s = Dd::from_f64(2.0).sqrt();
        let back = s.mul(s).sub(Dd::from_f64(2.0));
        assert!(back.to_f64().abs() < 1e-30);
    }

    #[test]
    fn exp_matches_reference() {
        // reference values computed at 50-digit precision
        let cases = [
            (1.0, 2.718_281_828_459_045, 1.445_646_891_729_250_2e-16),
            (12.0, 162_754.791_419_003_92, 5.300_658_813_220_63e-12),
            (-3.694_528_049_465_325, 0.024859183199194085, -1.3244856919641996e-18),
        ];
        for (x, hi, lo) in cases {
            let e = Dd::from_f64(x).exp();
            let want = Dd { hi, lo };
            let rel = e.sub(want).to_f64().abs() / want.to_f64();
            assert!(rel < 1e-29, "exp({x}): rel {rel:.2e}");
        }
    }

    #[test]
    fn cosh_sinh_difference_stays_exact() {
        // cosh(x) - sinh(x) = e^{-x}; the error of the difference is set by
        // the double-double epsilon on the ~e^{+x} terms, so the relative
        // error grows like e^{2x} * 1e-32 and stays far below the 1e-8
        // oracle budget for every argument the oracles use (|x| <= 12)
        for (x, bound) in [(5.0, 1e-25), (12.0, 1e-20)] {
            let xd = Dd::from_f64(x);
            let d = xd.cosh().sub(xd.sinh());
            let want = xd.neg().exp();
            let rel = d.sub(want).to_f64().abs() / want.to_f64();
            assert!(rel < bound, "x={x}: rel {rel:.2e}");
        }
    }
}
