//! Exact arithmetic over the rationals: dense univariate and sparse
//! multivariate polynomials, resultants, Sturm chains, real root isolation
//! and sign evaluation at real algebraic points.

pub mod algebraic;
pub mod bivariate;
pub mod jet;
pub mod parse;
pub mod poly;
pub mod resultant;
pub mod sturm;
pub mod upoly;
pub(crate) mod zpoly;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use algebraic::AlgebraicNumber;
pub use jet::Jet;
pub use parse::parse_poly;
pub use poly::MultiPoly;
pub use resultant::{discriminant, resultant, resultant_upoly};
pub use sturm::{isolate_real_roots, sign_at, sturm_count, SturmChain};
pub use upoly::UPoly;

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical `p/q` rendering (`p` when the denominator is one).
pub fn fmt_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = |m: &str| Error::Parse {
        pos: 0,
        msg: format!("{m}: {s:?}"),
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad("bad numerator"))?;
            let d: BigInt = d.trim().parse().map_err(|_| bad("bad denominator"))?;
            if d.is_zero() {
                return Err(bad("zero denominator"));
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad("bad integer"))?;
            Ok(Rational::from_integer(n))
        }
    }
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::{fmt_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Exact rational value of a finite double.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Huge numerator or denominator: shift both down before dividing.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift_n = (nb - 60).max(0) as usize;
    let shift_d = (db - 60).max(0) as usize;
    let n = (q.numer() >> shift_n).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift_d).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
}

/// Sign of a rational as -1, 0 or +1.
pub fn sign_of(q: &Rational) -> i8 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// The rational with the smallest denominator strictly inside `(a, b)`.
pub fn simplest_between(a: &Rational, b: &Rational) -> Rational {
    assert!(a < b, "empty interval");
    let fl = a.floor();
    let next = &fl + Rational::one();
    if &next < b {
        return if fl.is_negative() && b.is_positive() {
            Rational::zero()
        } else {
            next
        };
    }
    let lo = Rational::one() / (b - &fl);
    if a == &fl {
        return fl + Rational::one() / (lo.floor() + Rational::one());
    }
    let hi = Rational::one() / (a - &fl);
    fl + Rational::one() / simplest_between(&lo, &hi)
}

/// Continued-fraction approximations of `x`, returning the first convergent
/// within `tol` whose denominator does not exceed `max_den`.
pub fn rationalize(x: f64, tol: f64, max_den: i64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den as i128 {
            return None;
        }
        let approx = h2 as f64 / k2 as f64;
        if (approx - x).abs() <= tol {
            return Some(Rational::new(BigInt::from(h2), BigInt::from(k2)));
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = v - v.floor();
        if frac == 0.0 {
            return None;
        }
        v = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_rendering_round_trips() {
        for q in [rat(3, 2), rat(-7, 1), rat(0, 5), rat(22, -7)] {
            assert_eq!(parse_rational(&fmt_rational(&q)).unwrap(), q);
        }
        assert_eq!(fmt_rational(&rat(6, 4)), "3/2");
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn rationalize_recovers_small_fractions() {
        assert_eq!(rationalize(0.5, 1e-12, 1000), Some(rat(1, 2)));
        assert_eq!(rationalize(-0.75, 1e-12, 1000), Some(rat(-3, 4)));
        assert_eq!(rationalize(std::f64::consts::SQRT_2, 1e-14, 1000), None);
    }

    #[test]
    fn to_f64_handles_large_values() {
        let big = Rational::new(BigInt::from(10).pow(400), BigInt::from(10).pow(399) * 4);
        assert!((rational_to_f64(&big) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn simplest_rational_inside_interval() {
        assert_eq!(simplest_between(&rat(0, 1), &rat(1, 1)), rat(1, 2));
        assert_eq!(simplest_between(&rat(1, 3), &rat(1, 2)), rat(2, 5));
        assert_eq!(
            simplest_between(&rat(14, 10), &rat(15, 10)),
            rat(3, 2).min(rat(10, 7))
        );
        assert_eq!(simplest_between(&rat(-1, 2), &rat(3, 1)), rat(0, 1));
        assert_eq!(simplest_between(&rat(2, 1), &rat(7, 2)), rat(3, 1));
    }
}
