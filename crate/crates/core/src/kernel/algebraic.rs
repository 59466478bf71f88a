use std::cmp::Ordering;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::sturm::{sturm_count_upoly, SturmChain};
use super::zpoly::{self, ZPoly};
use super::{
    fmt_rational, parse_poly, parse_rational, rat, rational_to_f64, MultiPoly, Rational, UPoly,
};
use crate::error::{Error, Result};

/// Leading coefficients above this size skip exact rational-root detection.
const RATIONAL_ROOT_BITS: u64 = 192;

/// A real algebraic number: a root of a square-free rational polynomial,
/// pinned by an isolating interval.
///
/// When `lo == hi` the number is exactly that rational. Otherwise `(lo, hi)`
/// contains exactly one root and neither endpoint is a root.
#[derive(Clone, Debug)]
pub struct AlgebraicNumber {
    poly: UPoly,
    lo: Rational,
    hi: Rational,
    approx: OnceLock<f64>,
    ints: OnceLock<ZPoly>,
}

impl AlgebraicNumber {
    pub fn from_rational(q: Rational) -> Self {
        AlgebraicNumber {
            poly: UPoly::linear_root(&q),
            lo: q.clone(),
            hi: q,
            approx: OnceLock::new(),
            ints: OnceLock::new(),
        }
    }

    /// Trusted constructor used by root isolation.
    pub(crate) fn from_isolating(poly: UPoly, lo: Rational, hi: Rational) -> Self {
        let mut a = AlgebraicNumber {
            poly,
            lo,
            hi,
            approx: OnceLock::new(),
            ints: OnceLock::new(),
        };
        a.normalize();
        a
    }

    pub fn new(poly: UPoly, lo: Rational, hi: Rational) -> Result<Self> {
        if poly.is_zero() {
            return Err(Error::ZeroPolynomial("algebraic number".into()));
        }
        let poly = poly.square_free();
        if lo == hi {
            if !poly.eval(&lo).is_zero() {
                return Err(Error::Invalid(format!(
                    "{} is not a root",
                    fmt_rational(&lo)
                )));
            }
            return Ok(Self::from_rational(lo));
        }
        let n = sturm_count_upoly(&poly, &lo, &hi)?;
        if n != 1 {
            return Err(Error::Invalid(format!(
                "interval holds {n} roots, expected 1"
            )));
        }
        Ok(Self::from_isolating(poly, lo, hi))
    }

    fn normalize(&mut self) {
        if self.lo == self.hi {
            return;
        }
        if self.poly.degree() == 1 {
            let c = -self.poly.coeff(0) / self.poly.coeff(1);
            self.lo = c.clone();
            self.hi = c;
            return;
        }
        self.detect_rational();
    }

    /// A rational root `p/q` of the integer polynomial with leading
    /// coefficient `L` has `q | L`, so it is a multiple of `1/L`. Once the
    /// interval is shorter than `1/L` there is a single candidate to test.
    fn detect_rational(&mut self) {
        let den = self
            .poly
            .coeffs()
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let lead = (self.poly.leading() * Rational::from_integer(den))
            .to_integer()
            .abs();
        if lead.bits() > RATIONAL_ROOT_BITS {
            return;
        }
        let step = Rational::new(BigInt::one(), lead.clone());
        while self.width() >= step && self.lo != self.hi {
            self.refine_once();
        }
        if self.lo == self.hi {
            return;
        }
        let k = (&self.lo * Rational::from_integer(lead.clone())).ceil();
        let cand = k / Rational::from_integer(lead);
        if cand < self.hi && cand > self.lo && self.poly.eval(&cand).is_zero() {
            self.lo = cand.clone();
            self.hi = cand;
        }
    }

    pub fn poly(&self) -> &UPoly {
        &self.poly
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        (self.lo == self.hi).then_some(&self.lo)
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// One bisection step.
    fn poly_sign(&self, x: &Rational) -> i8 {
        zpoly::sign_at(self.ints.get_or_init(|| zpoly::primitive_of(&self.poly)), x)
    }

    pub fn refine_once(&mut self) {
        if self.lo == self.hi {
            return;
        }
        let m = (&self.lo + &self.hi) / rat(2, 1);
        let sm = self.poly_sign(&m);
        if sm == 0 {
            self.lo = m.clone();
            self.hi = m;
        } else if sm != self.poly_sign(&self.lo) {
            self.hi = m;
        } else {
            self.lo = m;
        }
    }

    pub fn refine_to(&mut self, width: &Rational) {
        while &self.width() > width {
            self.refine_once();
        }
    }

    pub fn to_f64(&self) -> f64 {
        *self.approx.get_or_init(|| self.compute_f64())
    }

    fn compute_f64(&self) -> f64 {
        if self.lo == self.hi {
            return rational_to_f64(&self.lo);
        }
        let mut a = self.clone();
        let scale = rational_to_f64(&a.lo)
            .abs()
            .max(rational_to_f64(&a.hi).abs())
            .max(1.0);
        let tol = super::rational_from_f64(scale * 1e-18);
        a.refine_to(&tol);
        rational_to_f64(&((&a.lo + &a.hi) / rat(2, 1)))
    }

    /// A rational strictly inside the isolating interval (the value itself if rational).
    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / rat(2, 1)
    }

    /// Exact sign of `p` at this number.
    pub fn sign_of(&self, p: &UPoly) -> i8 {
        if let Some(q) = self.as_rational() {
            return p.sign_at(q);
        }
        if p.is_zero() {
            return 0;
        }
        let g = p.gcd(&self.poly);
        if g.degree() >= 1 && SturmChain::new(&g).count(&self.lo, &self.hi) == 1 {
            return 0;
        }
        let sf = p.square_free();
        let chain = SturmChain::new(&sf);
        let mut a = self.clone();
        loop {
            if let Some(q) = a.as_rational() {
                return p.sign_at(q);
            }
            let s_lo = sf.sign_at(&a.lo);
            let s_hi = sf.sign_at(&a.hi);
            if s_lo != 0 && s_hi != 0 && chain.count(&a.lo, &a.hi) == 0 {
                return p.sign_at(&a.lo);
            }
            a.refine_once();
        }
    }

    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        if let Some(v) = self.as_rational() {
            return v.cmp(q);
        }
        let mut a = self.clone();
        loop {
            if let Some(v) = a.as_rational() {
                return v.cmp(q);
            }
            if q <= &a.lo {
                return Ordering::Greater;
            }
            if q >= &a.hi {
                return Ordering::Less;
            }
            if a.poly.eval(q).is_zero() {
                return Ordering::Equal;
            }
            a.refine_once();
        }
    }

    pub fn cmp_exact(&self, other: &AlgebraicNumber) -> Ordering {
        if let Some(q) = other.as_rational() {
            return self.cmp_rational(q);
        }
        if let Some(q) = self.as_rational() {
            return other.cmp_rational(q).reverse();
        }
        let g = self.poly.gcd(&other.poly);
        let (mut a, mut b) = (self.clone(), other.clone());
        loop {
            if a.as_rational().is_some() || b.as_rational().is_some() {
                return a.cmp_exact(&b);
            }
            if a.hi <= b.lo {
                return Ordering::Less;
            }
            if b.hi <= a.lo {
                return Ordering::Greater;
            }
            if g.degree() >= 1 {
                let lo = if a.lo > b.lo {
                    a.lo.clone()
                } else {
                    b.lo.clone()
                };
                let hi = if a.hi < b.hi {
                    a.hi.clone()
                } else {
                    b.hi.clone()
                };
                if g.sign_at(&lo) != 0
                    && g.sign_at(&hi) != 0
                    && SturmChain::new(&g).count(&lo, &hi) == 1
                {
                    return Ordering::Equal;
                }
            }
            a.refine_once();
            b.refine_once();
        }
    }

    pub fn is_positive(&self) -> bool {
        self.cmp_rational(&Rational::zero()) == Ordering::Greater
    }

    pub fn abs_bound(&self) -> Rational {
        let l = self.lo.abs();
        let h = self.hi.abs();
        if l > h {
            l
        } else {
            h
        }
    }
}

impl PartialEq for AlgebraicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_exact(other) == Ordering::Equal
    }
}

/// Serialized form: defining polynomial in `x1` and rational interval endpoints.
#[derive(Serialize, Deserialize)]
struct AlgebraicRepr {
    poly: String,
    lo: String,
    hi: String,
}

impl Serialize for AlgebraicNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AlgebraicRepr {
            poly: MultiPoly::from_upoly(1, 0, &self.poly).to_text(),
            lo: fmt_rational(&self.lo),
            hi: fmt_rational(&self.hi),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraicNumber {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = AlgebraicRepr::deserialize(d)?;
        let p = parse_poly(&r.poly, 1).map_err(D::Error::custom)?;
        let u = p.to_upoly(0).map_err(D::Error::custom)?;
        let lo = parse_rational(&r.lo).map_err(D::Error::custom)?;
        let hi = parse_rational(&r.hi).map_err(D::Error::custom)?;
        AlgebraicNumber::new(u, lo, hi).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::int;

    fn sqrt2() -> AlgebraicNumber {
        AlgebraicNumber::new(UPoly::from_ints(&[-2, 0, 1]), int(1), int(2)).unwrap()
    }

    #[test]
    fn compares_with_rationals_and_numbers() {
        let s = sqrt2();
        assert_eq!(s.cmp_rational(&rat(7, 5)), Ordering::Greater);
        assert_eq!(s.cmp_rational(&rat(3, 2)), Ordering::Less);
        // sqrt(2) as a root of x^4 - 4 on (1, 3/2)
        let t =
            AlgebraicNumber::new(UPoly::from_ints(&[-4, 0, 0, 0, 1]), int(1), rat(3, 2)).unwrap();
        assert_eq!(s.cmp_exact(&t), Ordering::Equal);
        let three = AlgebraicNumber::new(UPoly::from_ints(&[-3, 0, 1]), int(1), int(2)).unwrap();
        assert_eq!(s.cmp_exact(&three), Ordering::Less);
    }

    #[test]
    fn sign_of_other_polynomials() {
        let s = sqrt2();
        assert_eq!(s.sign_of(&UPoly::from_ints(&[-2, 0, 1])), 0);
        assert_eq!(s.sign_of(&UPoly::from_ints(&[-1, 1])), 1);
        assert_eq!(s.sign_of(&UPoly::from_ints(&[-3, 2])), -1);
        assert!((s.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(AlgebraicNumber::new(UPoly::from_ints(&[-2, 0, 1]), int(-2), int(2)).is_err());
        assert!(AlgebraicNumber::new(UPoly::from_ints(&[-2, 0, 1]), int(2), int(3)).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let s = sqrt2();
        let js = serde_json::to_string(&s).unwrap();
        let back: AlgebraicNumber = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }
}
