use std::cmp::Ordering;

use crparam::charts::{
    compose, eval_f64, mi_cmp, mi_succ, norm_estimate, rescale_to_unit, ChartExpr, MultiIndex,
    NormPolicy, Resolution, TriangularChart,
};
use crparam::engine::{resolve_interval_cr, Limits, NashInput};
use crparam::kernel::{rat, MultiPoly, Rational};
use crparam::verifier::{
    check_inverses, check_norms, squashed_polynomial, verify_resolution, CoverageTarget,
    VerifyConfig,
};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=5).prop_map(|(n, d)| rat(n, d))
}

fn multi_index(d: usize, max_w: u32) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(0u32..=max_w, d)
        .prop_filter("weight bound", move |v| v.iter().sum::<u32>() <= max_w)
        .prop_map(MultiIndex::new)
}

fn indices_up_to(d: usize, max_w: u32) -> Vec<MultiIndex> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                (0..=max_w).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out.into_iter()
        .filter(|v| v.iter().sum::<u32>() <= max_w)
        .map(MultiIndex::new)
        .collect()
}

/// Polynomial in the listed variables of a `vars`-variable ring.
fn poly_in(vars: usize, allowed: Vec<usize>) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(
        (prop::collection::vec(0u32..=2, allowed.len()), small_rational()),
        1..=4,
    )
    .prop_map(move |terms| {
        MultiPoly::from_terms(
            vars,
            terms.into_iter().map(|(es, c)| {
                let mut e = vec![0; vars];
                for (k, &v) in allowed.iter().enumerate() {
                    e[v] = es[k];
                }
                (e, c)
            }),
        )
    })
}

/// A 2 -> 2 triangular chart: the first component uses both variables, the
/// second only the last one.
fn triangular_pair() -> impl Strategy<Value = TriangularChart> {
    (poly_in(2, vec![0, 1]), poly_in(2, vec![1])).prop_map(|(a, b)| {
        TriangularChart::new(2, vec![ChartExpr::from_poly(&a), ChartExpr::from_poly(&b)]).unwrap()
    })
}

fn squashed(max_deg: usize) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(small_rational(), 2..=max_deg + 1)
        .prop_filter("nonzero", |c| c.iter().any(|q| q != &rat(0, 1)))
        .prop_map(|c| squashed_polynomial(&c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn order_is_total_and_transitive(
        a in multi_index(3, 5),
        b in multi_index(3, 5),
        c in multi_index(3, 5),
    ) {
        let ab = mi_cmp(&a, &b).unwrap();
        prop_assert_eq!(ab, mi_cmp(&b, &a).unwrap().reverse());
        prop_assert_eq!(ab == Ordering::Equal, a == b);
        let bc = mi_cmp(&b, &c).unwrap();
        if ab != Ordering::Greater && bc != Ordering::Greater {
            prop_assert_ne!(mi_cmp(&a, &c).unwrap(), Ordering::Greater);
        }
    }

    #[test]
    fn successor_is_the_least_greater_index(a in multi_index(2, 4)) {
        let s = mi_succ(&a);
        prop_assert_eq!(mi_cmp(&a, &s).unwrap(), Ordering::Less);
        for b in indices_up_to(2, 6) {
            if mi_cmp(&a, &b).unwrap() == Ordering::Less {
                prop_assert_ne!(mi_cmp(&b, &s).unwrap(), Ordering::Less, "{} lies between {} and {}", b, a, s);
            }
        }
    }

    #[test]
    fn top_index_dominates_its_weight(d in 1usize..=3, r in 1u32..=4) {
        let top = MultiIndex::top(d, r);
        prop_assert_eq!(top.as_slice().last().copied(), Some(r));
        for b in indices_up_to(d, r).into_iter().filter(|b| b.weight() == r) {
            prop_assert_ne!(mi_cmp(&b, &top).unwrap(), Ordering::Greater);
        }
    }

    #[test]
    fn composition_preserves_triangularity(
        outer in triangular_pair(),
        inner in triangular_pair(),
        t in (0.05f64..0.95, 0.05f64..0.95),
    ) {
        let c = compose(&outer, &inner).unwrap();
        prop_assert_eq!(c.l(), 2);
        prop_assert!(!c.components()[1].free_vars().contains(&0));
        let direct = outer.eval_f64(&inner.eval_f64(&[t.0, t.1]).unwrap()).unwrap();
        let composed = c.eval_f64(&[t.0, t.1]).unwrap();
        for (x, y) in direct.iter().zip(&composed) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn rescaled_pieces_have_unit_norm(p in squashed(4), r in 1u32..=3) {
        let f = ChartExpr::from_poly(&p);
        let alpha = MultiIndex::new(vec![r]);
        let policy = NormPolicy::for_dim(1);
        let out = rescale_to_unit(std::slice::from_ref(&f), 1, &alpha, &policy, 10_000).unwrap();
        prop_assert_eq!(out.pieces.len(), out.per_axis as usize);
        let k = out.per_axis as i64;
        for (i, piece) in out.pieces.iter().enumerate() {
            let g = piece.pullback(&f).unwrap();
            let n = norm_estimate(&[g], 1, &alpha, &policy).unwrap();
            prop_assert!(n.estimate <= 1.0 + 1e-9, "piece {} of {}: {}", i, k, n.estimate);
            let lo = eval_f64(&piece.components()[0], &[0.0]).unwrap();
            let hi = eval_f64(&piece.components()[0], &[1.0]).unwrap();
            prop_assert!((lo - i as f64 / k as f64).abs() < 1e-15);
            prop_assert!((hi - (i + 1) as f64 / k as f64).abs() < 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn interval_resolutions_pass_their_gates(p in squashed(4), r in 1u32..=2) {
        let res = resolve_interval_cr(&NashInput::Poly(p.clone()), &rat(0, 1), &rat(1, 1), r, &Limits::default()).unwrap();
        prop_assert!(check_norms(&res, 1e-6).unwrap().passed, "{}", p.to_text());
        prop_assert!(check_inverses(&res, 1e-10).unwrap().passed, "{}", p.to_text());
        let v = res.to_json();
        prop_assert_eq!(Resolution::from_json(&v).unwrap().to_json(), v.clone());
        let again = resolve_interval_cr(&NashInput::Poly(p), &rat(0, 1), &rat(1, 1), r, &Limits::default()).unwrap();
        prop_assert_eq!(serde_json::to_string(&again.to_json()).unwrap(), serde_json::to_string(&v).unwrap());
    }

    #[test]
    fn verification_is_deterministic(p in squashed(3)) {
        let res = resolve_interval_cr(&NashInput::Poly(p), &rat(0, 1), &rat(1, 1), 2, &Limits::default()).unwrap();
        let target = CoverageTarget::of(&res);
        let cfg = VerifyConfig { samples: 500, ..VerifyConfig::default() };
        let a = verify_resolution(&res, Some(&target), &cfg).unwrap();
        let b = verify_resolution(&res, Some(&target), &cfg).unwrap();
        prop_assert!(a.passed());
        prop_assert_eq!(a.to_json(), b.to_json());
    }
}
