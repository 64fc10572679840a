//! Minimal double-double arithmetic for the extended-precision oracles.
//!
//! Only what the validation paths need: error-free sum/product splitting,
//! the four ring operations, and a complex wrapper for polynomial
//! convolution and Horner evaluation. Roughly 32 significant digits, which
//! leaves plenty of headroom over the 1e-10 oracle tolerances.

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
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

    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd { hi: -other.hi, lo: -other.lo })
    }

    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::from(q1)));
        let q2 = r.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

/// Complex number over [`Dd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub const ZERO: CDd = CDd { re: Dd::ZERO, im: Dd::ZERO };

    pub fn from(re: f64, im: f64) -> CDd {
        CDd { re: Dd::from(re), im: Dd::from(im) }
    }

    pub fn add(self, other: CDd) -> CDd {
        CDd { re: self.re.add(other.re), im: self.im.add(other.im) }
    }

    pub fn sub(self, other: CDd) -> CDd {
        CDd { re: self.re.sub(other.re), im: self.im.sub(other.im) }
    }

    pub fn mul(self, other: CDd) -> CDd {
        CDd {
            re: self.re.mul(other.re).sub(self.im.mul(other.im)),
            im: self.re.mul(other.im).add(self.im.mul(other.re)),
        }
    }

    pub fn value(self) -> (f64, f64) {
        (self.re.value(), self.im.value())
    }

    pub fn abs(self) -> f64 {
        self.re.value().hypot(self.im.value())
    }
}

/// Expand a monic polynomial from its roots by repeated synthetic
/// multiplication in double-double precision; coefficients ascending.
pub fn monic_from_roots_dd(roots: &[(f64, f64)]) -> Vec<CDd> {
    let mut coeffs = vec![CDd::from(1.0, 0.0)];
    for &(re, im) in roots {
        let root = CDd::from(re, im);
        let mut next = vec![CDd::ZERO; coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k + 1] = next[k + 1].add(c);
            next[k] = next[k].sub(c.mul(root));
        }
        coeffs = next;
    }
    coeffs
}

/// Horner evaluation of a coefficient list (ascending) at a point.
pub fn horner_dd(coeffs: &[CDd], z: CDd) -> CDd {
    let mut acc = CDd::ZERO;
    for &c in coeffs.iter().rev() {
        acc = acc.mul(z).add(c);
    }
    acc
}
