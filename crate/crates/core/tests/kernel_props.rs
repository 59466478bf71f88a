use crparam::kernel::sturm::{isolate_upoly, sturm_count_upoly, Point};
use crparam::kernel::{resultant, sign_at, MultiPoly, Rational, UPoly};
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| q(n, d))
}

fn upoly(max_deg: usize) -> impl Strategy<Value = UPoly> {
    prop::collection::vec(small_rational(), 1..=max_deg + 1)
        .prop_map(UPoly::new)
        .prop_filter("nonconstant", |p| p.degree() >= 1)
}

fn bivariate() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(((0u32..=3, 0u32..=3), small_rational()), 1..=8)
        .prop_map(|ts| MultiPoly::from_terms(2, ts.into_iter().map(|((a, b), c)| (vec![a, b], c))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn isolation_counts_add_up(p in upoly(8)) {
        let (lo, hi) = (q(-41, 7), q(37, 6));
        prop_assume!(!p.eval(&lo).is_zero() && !p.eval(&hi).is_zero());
        let roots = isolate_upoly(&p, &lo, &hi).unwrap();
        let total = sturm_count_upoly(&p, &lo, &hi).unwrap();
        let mut sum = 0;
        for r in &roots {
            sum += match r.as_rational() {
                Some(_) => 1,
                None => sturm_count_upoly(&p, r.lo(), r.hi()).unwrap(),
            };
        }
        prop_assert_eq!(sum, total);
        prop_assert_eq!(roots.len(), total);
        for w in roots.windows(2) {
            prop_assert!(w[0].hi() <= w[1].lo());
        }
    }

    #[test]
    fn mixed_partials_commute(p in bivariate()) {
        let a = p.derivative(0).unwrap().derivative(1).unwrap();
        let b = p.derivative(1).unwrap().derivative(0).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn sign_at_matches_float(p in upoly(6), x in small_rational()) {
        let m = MultiPoly::from_upoly(1, 0, &p);
        let s = sign_at(&m, &Point::Rational(x.clone())).unwrap();
        let f = p.eval_f64(crparam::kernel::rational_to_f64(&x));
        if f.abs() > 1e-6 {
            prop_assert_eq!(s, if f > 0.0 { 1 } else { -1 });
        }
    }

    #[test]
    fn algebraic_sign_matches_float(p in upoly(5), r in upoly(4)) {
        let roots = isolate_upoly(&r, &q(-50, 1), &q(50, 1)).unwrap();
        for a in roots {
            let s = a.sign_of(&p);
            let f = p.eval_f64(a.to_f64());
            if f.abs() > 1e-6 {
                prop_assert_eq!(s, if f > 0.0 { 1 } else { -1 });
            }
        }
    }
}

/// Brute-force check of the resultant's vanishing against a univariate gcd,
/// on monic-in-x1 pairs so leading coefficients never drop.
#[test]
fn resultant_vanishes_iff_common_factor() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    let mut vanished = 0;
    while checked < 60 {
        let a0 = rng.gen_range(-3..=3);
        let a1 = rng.gen_range(-3..=3);
        let b0 = rng.gen_range(-3..=3);
        let b1 = rng.gen_range(-3..=3);
        // p = (x1 - a0 - a1 x2)(x1^2 + c), q = (x1 - b0 - b1 x2)(x1 + d x2)
        let c = rng.gen_range(-2..=2);
        let d = rng.gen_range(-2..=2);
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let k = |v: i64| MultiPoly::constant(2, q(v, 1));
        let p = &(&(&x - &k(a0)) - &(&k(a1) * &y)) * &(&(&x * &x) + &k(c));
        let qq = &(&(&x - &k(b0)) - &(&k(b1) * &y)) * &(&x + &(&k(d) * &y));
        let res = resultant(&p, &qq, 0).unwrap();
        for y0 in -4..=4 {
            let y0 = q(y0, 1);
            let rv = res.substitute(1, &y0).unwrap().constant_term();
            let pu = p.substitute(1, &y0).unwrap().to_upoly(0).unwrap();
            let qu = qq.substitute(1, &y0).unwrap().to_upoly(0).unwrap();
            let common = pu.gcd(&qu).degree() >= 1;
            assert_eq!(rv.is_zero(), common, "p={p} q={qq} y={y0}");
            vanished += usize::from(common);
            checked += 1;
        }
    }
    assert!(vanished > 0);
}
