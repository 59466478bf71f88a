use super::zpoly;
use super::{fmt_rational, rat, AlgebraicNumber, MultiPoly, Rational, UPoly};
use crate::error::{Error, Result};

/// Signed remainder sequence `p, p', -rem(p, p'), ...`, each member scaled
/// by a positive constant to integer coefficients.
#[derive(Debug, Clone)]
pub struct SturmChain {
    seq: Vec<UPoly>,
    ints: Vec<zpoly::ZPoly>,
}

impl SturmChain {
    pub fn new(p: &UPoly) -> Self {
        let mut ints = Vec::new();
        let p0 = zpoly::primitive_of(p);
        if !p0.is_empty() {
            let d = zpoly::derivative(&p0);
            ints.push(p0);
            if !d.is_empty() {
                ints.push(d);
                loop {
                    let n = ints.len();
                    let (r, s) = zpoly::scaled_rem(&ints[n - 2], &ints[n - 1]);
                    if r.is_empty() {
                        break;
                    }
                    ints.push(if s > 0 {
                        r.into_iter().map(|c| -c).collect()
                    } else {
                        r
                    });
                }
            }
        }
        let seq = if ints.is_empty() {
            vec![p.clone()]
        } else {
            ints.iter().map(zpoly::to_upoly).collect()
        };
        SturmChain { seq, ints }
    }

    pub fn polys(&self) -> &[UPoly] {
        &self.seq
    }

    /// Number of sign changes of the chain at `x`, zeros skipped.
    pub fn variations(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.ints {
            let s = zpoly::sign_at(p, x);
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Distinct roots in `(a, b)`, valid when neither endpoint is a root.
    pub fn count(&self, a: &Rational, b: &Rational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// Number of distinct real roots of a univariate `p` in `(a, b)`.
pub fn sturm_count(p: &MultiPoly, a: &Rational, b: &Rational) -> Result<usize> {
    let u = p.as_univariate()?;
    sturm_count_upoly(&u, a, b)
}

pub fn sturm_count_upoly(p: &UPoly, a: &Rational, b: &Rational) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial("sturm_count".into()));
    }
    if a >= b {
        return Err(Error::InvalidInterval(format!(
            "({}, {})",
            fmt_rational(a),
            fmt_rational(b)
        )));
    }
    let sf = p.square_free();
    for e in [a, b] {
        if sf.sign_at(e) == 0 {
            return Err(Error::EndpointRoot(fmt_rational(e)));
        }
    }
    Ok(SturmChain::new(&sf).count(a, b))
}

/// Isolating intervals for the roots of univariate `p` strictly inside `(lo, hi)`.
///
/// Intervals are open, sorted, pairwise disjoint, have rational endpoints
/// that are not roots, and each contains exactly one root.
pub fn isolate_real_roots(
    p: &MultiPoly,
    lo: &Rational,
    hi: &Rational,
) -> Result<Vec<(Rational, Rational)>> {
    let u = p.as_univariate()?;
    Ok(isolating_intervals(&u, lo, hi)?.1)
}

/// Roots of `p` strictly inside `(lo, hi)` as algebraic numbers, sorted.
/// Rational roots are recognized and kept exact.
pub fn isolate_upoly(p: &UPoly, lo: &Rational, hi: &Rational) -> Result<Vec<AlgebraicNumber>> {
    let (sf, iv) = isolating_intervals(p, lo, hi)?;
    Ok(iv
        .into_iter()
        .map(|(a, b)| AlgebraicNumber::from_isolating(sf.clone(), a, b))
        .collect())
}

fn isolating_intervals(
    p: &UPoly,
    lo: &Rational,
    hi: &Rational,
) -> Result<(UPoly, Vec<(Rational, Rational)>)> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial("isolate_real_roots".into()));
    }
    if lo >= hi {
        return Err(Error::InvalidInterval(format!(
            "({}, {})",
            fmt_rational(lo),
            fmt_rational(hi)
        )));
    }
    let sf = p.square_free();
    if sf.degree() == 0 {
        return Ok((sf, Vec::new()));
    }
    // Endpoint roots are excluded: deflate them away for counting.
    let mut work = sf.clone();
    for e in [lo, hi] {
        if work.sign_at(e) == 0 {
            work = work.div_rem(&UPoly::linear_root(e)).0;
        }
    }
    let chain = SturmChain::new(&work);
    let mut out = Vec::new();
    if work.degree() == 0 {
        return Ok((sf, out));
    }
    let mut stack = vec![(lo.clone(), hi.clone(), chain.count(lo, hi))];
    while let Some((a, b, n)) = stack.pop() {
        match n {
            0 => {}
            1 => {
                out.push(pull_off_roots(&sf, &chain, a, b));
            }
            _ => {
                let m = split_point(&work, &a, &b);
                let left = chain.count(&a, &m);
                stack.push((m.clone(), b, n - left));
                stack.push((a, m, left));
            }
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    Ok((sf, out))
}

/// Move endpoints that are roots of `sf` (only possible at the outer
/// interval) inward while keeping the single interior root.
fn pull_off_roots(
    sf: &UPoly,
    chain: &SturmChain,
    mut a: Rational,
    mut b: Rational,
) -> (Rational, Rational) {
    let mut k = 2i64;
    while sf.sign_at(&a) == 0 {
        let cand = &a + (&b - &a) * rat(1, k);
        if sf.sign_at(&cand) != 0 && chain.count(&cand, &b) == 1 {
            a = cand;
        }
        k *= 2;
    }
    k = 2;
    while sf.sign_at(&b) == 0 {
        let cand = &b - (&b - &a) * rat(1, k);
        if sf.sign_at(&cand) != 0 && chain.count(&a, &cand) == 1 {
            b = cand;
        }
        k *= 2;
    }
    (a, b)
}

/// A rational point strictly inside `(a, b)` that is not a root of `p`,
/// trying the midpoint first.
pub(crate) fn split_point(p: &UPoly, a: &Rational, b: &Rational) -> Rational {
    let w = b - a;
    for den in 2i64.. {
        for num in 1..den {
            let m = a + &w * rat(num, den);
            if p.sign_at(&m) != 0 {
                return m;
            }
        }
    }
    unreachable!()
}

/// Exact sign of univariate `p` at a rational or algebraic point.
pub fn sign_at(p: &MultiPoly, point: &Point) -> Result<i8> {
    let u = p.as_univariate()?;
    Ok(match point {
        Point::Rational(q) => u.sign_at(q),
        Point::Algebraic(a) => a.sign_of(&u),
    })
}

/// A real point given exactly.
#[derive(Debug, Clone)]
pub enum Point {
    Rational(Rational),
    Algebraic(AlgebraicNumber),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{int, parse_poly};

    fn p(s: &str) -> MultiPoly {
        parse_poly(s, 1).unwrap()
    }

    /// Independent oracle: count sign changes of p on a fine rational grid.
    fn grid_sign_changes(u: &UPoly, a: &Rational, b: &Rational, steps: i64) -> usize {
        let mut last = 0i8;
        let mut count = 0;
        for k in 1..steps {
            let x = a + (b - a) * rat(k, steps);
            let s = u.sign_at(&x);
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    #[test]
    fn sturm_count_examples() {
        assert_eq!(sturm_count(&p("x1^2 - 2"), &int(0), &int(2)).unwrap(), 1);
        assert_eq!(sturm_count(&p("x1^2 - 2"), &int(2), &int(3)).unwrap(), 0);
        assert_eq!(
            sturm_count(&p("(x1^2 - 2)*(x1^2 - 3)"), &int(1), &int(2)).unwrap(),
            2
        );
        let u = p("(x1^2 - 2)*(x1^2 - 3)").as_univariate().unwrap();
        assert_eq!(grid_sign_changes(&u, &int(1), &int(2), 1000), 2);
        assert!(matches!(
            sturm_count(&p("x1^2 - 4"), &int(0), &int(2)),
            Err(Error::EndpointRoot(_))
        ));
    }

    #[test]
    fn isolation_examples() {
        let iv = isolate_real_roots(&p("x1^2 - 2"), &int(0), &int(2)).unwrap();
        assert_eq!(iv.len(), 1);
        let mut a = AlgebraicNumber::from_isolating(
            p("x1^2 - 2").as_univariate().unwrap(),
            iv[0].0.clone(),
            iv[0].1.clone(),
        );
        a.refine_to(&rat(1, 4));
        assert!(a.lo() >= &rat(5, 4) && a.hi() <= &rat(3, 2));

        assert!(isolate_real_roots(&p("x1^2 + 1"), &int(-10), &int(10))
            .unwrap()
            .is_empty());

        let iv = isolate_real_roots(&p("x1*(x1 - 1/2)"), &int(0), &int(1)).unwrap();
        assert_eq!(iv.len(), 1);
        assert!(iv[0].0 < rat(1, 2) && rat(1, 2) < iv[0].1);
        assert!(iv[0].0 > int(0));
        assert!(isolate_real_roots(&MultiPoly::zero(1), &int(0), &int(1)).is_err());
    }

    #[test]
    fn sign_at_examples() {
        let q = p("x1^2 - 2");
        let u = q.as_univariate().unwrap();
        let root = AlgebraicNumber::new(u, int(1), int(2)).unwrap();
        assert_eq!(sign_at(&q, &Point::Algebraic(root)).unwrap(), 0);
        assert_eq!(sign_at(&q, &Point::Rational(int(1))).unwrap(), -1);
        assert_eq!(sign_at(&q, &Point::Rational(rat(3, 2))).unwrap(), 1);
    }

    #[test]
    fn repeated_and_rational_roots() {
        // (x - 1/3)^2 (x - 1/2)(x - 2/3): three distinct roots, some hit by bisection
        let q = p("(x1 - 1/3)^2*(x1 - 1/2)*(x1 - 2/3)");
        let iv = isolate_real_roots(&q, &int(0), &int(1)).unwrap();
        assert_eq!(iv.len(), 3);
        for w in iv.windows(2) {
            assert!(w[0].1 <= w[1].0);
        }
    }
}
