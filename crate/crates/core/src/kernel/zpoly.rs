//! Integer-coefficient helpers. Remainder sequences over the rationals blow
//! up quickly; working with primitive integer polynomials keeps them small.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Rational, UPoly};

/// Lowest degree first, no trailing zeros.
pub(crate) type ZPoly = Vec<BigInt>;

fn trim(v: &mut ZPoly) {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
}

/// Divide out the (positive) content.
pub(crate) fn make_primitive(mut v: ZPoly) -> ZPoly {
    trim(&mut v);
    let g = v.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && !g.is_one() {
        for c in v.iter_mut() {
            *c /= &g;
        }
    }
    v
}

/// A positive multiple of `p` with coprime integer coefficients.
pub(crate) fn primitive_of(p: &UPoly) -> ZPoly {
    let lcm = p
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    make_primitive(
        p.coeffs()
            .iter()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect(),
    )
}

pub(crate) fn to_upoly(v: &ZPoly) -> UPoly {
    UPoly::new(
        v.iter()
            .map(|c| Rational::from_integer(c.clone()))
            .collect(),
    )
}

pub(crate) fn derivative(v: &ZPoly) -> ZPoly {
    make_primitive(
        v.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigInt::from(k))
            .collect(),
    )
}

/// `(r, s)` with `r = c * rem(a, b)` for some constant `c` of sign `s`.
pub(crate) fn scaled_rem(a: &ZPoly, b: &ZPoly) -> (ZPoly, i8) {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lc = &b[db];
    let mut sign = 1i8;
    while r.len() > db {
        let dr = r.len() - 1;
        let c = r[dr].clone();
        let shift = dr - db;
        for x in r.iter_mut() {
            *x *= lc;
        }
        for (j, bc) in b.iter().enumerate() {
            r[shift + j] -= &c * bc;
        }
        if lc.is_negative() {
            sign = -sign;
        }
        trim(&mut r);
    }
    (make_primitive(r), sign)
}

/// Primitive gcd, leading coefficient positive.
pub(crate) fn gcd(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let (mut a, mut b) = (make_primitive(a.clone()), make_primitive(b.clone()));
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let (r, _) = scaled_rem(&a, &b);
        a = b;
        b = r;
    }
    if a.last().is_some_and(Signed::is_negative) {
        for c in a.iter_mut() {
            *c = -&*c;
        }
    }
    a
}

/// Sign of `v` at a rational point, by homogenized integer Horner.
pub(crate) fn sign_at(v: &ZPoly, x: &Rational) -> i8 {
    if v.is_empty() {
        return 0;
    }
    let (n, d) = (x.numer(), x.denom());
    let mut acc = v[v.len() - 1].clone();
    let mut dpow = BigInt::one();
    for c in v.iter().rev().skip(1) {
        dpow *= d;
        acc = acc * n + c * &dpow;
    }
    if acc.is_zero() {
        0
    } else if acc.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rat;

    fn z(c: &[i64]) -> ZPoly {
        c.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn gcd_of_products() {
        // (x - 1)(x + 2) and (x - 1)(2x + 3)
        let g = gcd(&z(&[-2, 1, 1]), &z(&[-3, 1, 2]));
        assert_eq!(g, z(&[-1, 1]));
    }

    #[test]
    fn scaled_rem_matches_rational_rem() {
        let a = z(&[1, 0, 3, -2]);
        let b = z(&[2, -3]);
        let (r, s) = scaled_rem(&a, &b);
        let exact = to_upoly(&a).rem(&to_upoly(&b));
        let ratio = &exact.coeffs()[0] / Rational::from_integer(r[0].clone());
        assert_eq!(ratio > rat(0, 1), s > 0);
    }

    #[test]
    fn signs_match_rational_evaluation() {
        let p = UPoly::new(vec![rat(1, 3), rat(-5, 2), rat(0, 1), rat(7, 4)]);
        let v = primitive_of(&p);
        for x in [rat(-3, 2), rat(0, 1), rat(1, 7), rat(22, 5)] {
            assert_eq!(sign_at(&v, &x), crate::kernel::sign_of(&p.eval(&x)));
        }
    }
}
