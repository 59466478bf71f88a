use std::slice::from_ref;

use rayon::prelude::*;

use crate::charts::norm::install;
use crate::charts::{
    alpha_for, eval_f64, jets_at, norm_estimate, InverseRecord, NormPolicy, Resolution,
};
use crate::error::Result;
use crate::kernel::{rat, Rational};
use crate::semialg::cad::sign_at_coords;
use crate::semialg::{slices_of, Decomposition, Presentation, Rel, SignCondition};

use super::Gate;

/// Every chart and every pulled-back function has norm at most `1 + tol`,
/// measured on a grid finer than the one used during construction. A sweep
/// that did not settle fails the gate.
pub fn check_norms(res: &Resolution, tol: f64) -> Result<Gate> {
    let mut g = Gate::new("norms", format!("nested grids, alpha {}", res.alpha), tol);
    for (i, c) in res.charts.iter().enumerate() {
        let l = c.chart.l();
        let funcs = res.controlled(&c.chart)?;
        let rep = norm_estimate(
            &funcs,
            l,
            &alpha_for(&res.alpha, l),
            &NormPolicy::refined(l),
        )?;
        g.checked += 1;
        g.observe(rep.estimate, 1.0 + tol);
        if rep.estimate > 1.0 + tol {
            g.fail(format!("chart {i} ({}): norm {}", c.source, rep.estimate));
        }
        if !rep.converged {
            g.fail(format!(
                "chart {i} ({}): refinement did not settle at {}",
                c.source, rep.estimate
            ));
        }
    }
    Ok(g)
}

fn unit_grid(l: usize, k: usize) -> Vec<Vec<f64>> {
    let ts: Vec<f64> = (0..k).map(|i| (i as f64 + 0.5) / k as f64).collect();
    match l {
        0 => vec![vec![]],
        1 => ts.iter().map(|&t| vec![t]).collect(),
        _ => ts
            .iter()
            .flat_map(|&a| ts.iter().map(move |&b| vec![a, b]))
            .collect(),
    }
}

/// `|f ∘ φ - target| < tol` for every recorded inverse chart: 50 points on
/// curves, a 50 x 50 grid on surfaces.
pub fn check_inverses(res: &Resolution, tol: f64) -> Result<Gate> {
    check_inverse_records(&res.inverses, tol)
}

pub fn check_inverse_records(records: &[InverseRecord], tol: f64) -> Result<Gate> {
    let mut g = Gate::new("inverses", "50 points per curve, 50x50 per surface", tol);
    for (i, inv) in records.iter().enumerate() {
        for t in unit_grid(inv.chart.l(), 50) {
            let x = inv.chart.eval_f64(&t)?;
            let err = (eval_f64(&inv.function, &x)? - eval_f64(&inv.target, &t)?).abs();
            g.checked += 1;
            g.observe(err, tol);
            if !(err < tol) {
                g.fail(format!("inverse {i} at {t:?}: error {err:e}"));
            }
        }
    }
    Ok(g)
}

/// For a piece `G` with `|G^(r)|` decreasing and lower derivatives bounded
/// by one: `x |G^(r)(x)| <= 2`, and after `x -> x^2` the derivative of order
/// `r` stays below `C + 2^(r+1)`, where `C` bounds the terms of the chain
/// rule other than `G^(r)(x^2) (2x)^r`.
pub fn check_estimate_eq1(piece: &crate::charts::ChartExpr, r: u32) -> Result<(Gate, Gate)> {
    let mut eq1 = Gate::new("estimate-eq1", "1000 midpoints, bound 2", 1e-9);
    let mut sq = Gate::new("estimate-square", "1000 midpoints, bound C + 2^(r+1)", 1e-6);
    let squared = piece.substitute(&[crate::charts::ChartExpr::square(
        crate::charts::ChartExpr::var(0),
    )])?;
    let mut c_rem = 0.0f64;
    let mut top = 0.0f64;
    for i in 0..1000 {
        let x = (i as f64 + 0.5) / 1000.0;
        let d = jets_at(from_ref(piece), &[x], r)?[0].derivative(&[r]);
        let v = x * d.abs();
        eq1.checked += 1;
        eq1.observe(v, 2.0 + 1e-9);
        if !(v <= 2.0 + 1e-9) {
            eq1.fail(format!("x |G^({r})| = {v} at x = {x}"));
        }
        let full = jets_at(from_ref(&squared), &[x], r)?[0].derivative(&[r]);
        let lead =
            jets_at(from_ref(piece), &[x * x], r)?[0].derivative(&[r]) * (2.0 * x).powi(r as i32);
        c_rem = c_rem.max((full - lead).abs());
        top = top.max(full.abs());
    }
    let excess = top - (c_rem + 2f64.powi(r as i32 + 1));
    sq.checked = 1000;
    sq.measured = excess;
    if !(excess <= 1e-6) {
        sq.fail(format!("sup {top} exceeds C = {c_rem} plus 2^{}", r + 1));
    }
    sq.notes.push(format!("measured C = {c_rem}"));
    Ok((eq1, sq))
}

/// Presentation whose slices are all the cells of `decomp` for the
/// polynomials of `pres`.
fn every_cell(pres: &Presentation) -> Result<Presentation> {
    let mut union = Vec::new();
    for p in pres.polys() {
        for rel in [Rel::Gt, Rel::Lt, Rel::Eq] {
            union.push(vec![SignCondition::new(p.clone(), rel)?]);
        }
    }
    Presentation::new(pres.vars(), pres.box_n(), union)
}

/// Sign vectors are constant on every cell: about `k` exact samples per cell.
pub fn check_sign_invariance(
    pres: &Presentation,
    decomp: &Decomposition,
    k: usize,
) -> Result<Gate> {
    let mut g = Gate::new(
        "sign-invariance",
        format!("{k} exact samples per cell"),
        0.0,
    );
    if pres.polys().is_empty() {
        return Ok(g);
    }
    for s in slices_of(&every_cell(pres)?, decomp)? {
        for pt in s.samples(k)? {
            let signs = pres
                .polys()
                .iter()
                .map(|p| sign_at_coords(p, &pt))
                .collect::<Result<Vec<_>>>()?;
            g.checked += 1;
            if signs != s.signs {
                g.measured += 1.0;
                let at: Vec<f64> = pt.iter().map(|a| a.to_f64()).collect();
                g.fail(format!(
                    "signs {signs:?} differ from {:?} at {at:?}",
                    s.signs
                ));
            }
        }
    }
    Ok(g)
}

/// Exact membership on a `steps^d` grid of cell midpoints agrees with the
/// union of the slices, and the slices are disjoint there.
pub fn check_membership_grid(
    pres: &Presentation,
    decomp: &Decomposition,
    steps: i64,
) -> Result<Gate> {
    let mut g = Gate::new("membership-grid", format!("{steps}^d midpoints"), 0.0);
    let slices = slices_of(pres, decomp)?;
    let (lo, hi) = pres.interval();
    let grid: Vec<Rational> = (0..steps)
        .map(|i| &lo + (&hi - &lo) * rat(2 * i + 1, 2 * steps))
        .collect();
    let rows: Vec<(Option<Rational>, Vec<Rational>)> = if pres.vars() == 1 {
        vec![(None, grid.clone())]
    } else {
        grid.iter()
            .map(|y| (Some(y.clone()), grid.clone()))
            .collect()
    };
    let results: Vec<Vec<(Vec<Rational>, bool, usize)>> = install(|| {
        rows.par_iter()
            .map(|(y, xs)| {
                let tests = match y {
                    None => Vec::new(),
                    Some(y) => slices
                        .iter()
                        .map(|s| s.row(y))
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .flatten()
                        .collect(),
                };
                let mut bad = Vec::new();
                for x in xs {
                    let p: Vec<Rational> = y.iter().fold(vec![x.clone()], |mut v, y| {
                        v.push(y.clone());
                        v
                    });
                    let inside = pres.contains(&p)?;
                    let hits = match y {
                        None => slices
                            .iter()
                            .map(|s| s.contains(&p))
                            .collect::<Result<Vec<_>>>()?
                            .into_iter()
                            .filter(|&h| h)
                            .count(),
                        Some(_) => tests.iter().filter(|t| t.contains(x)).count(),
                    };
                    if hits > 1 || inside != (hits == 1) {
                        bad.push((p, inside, hits));
                    }
                }
                Ok(bad)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    g.checked = grid.len().pow(pres.vars() as u32);
    for (p, inside, hits) in results.into_iter().flatten() {
        g.measured += 1.0;
        let at: Vec<f64> = p.iter().map(crate::kernel::rational_to_f64).collect();
        g.fail(format!("membership {inside} but {hits} slices at {at:?}"));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{ChartExpr, ChartRecord, Domain, MultiIndex, TriangularChart};
    use crate::kernel::parse_poly;
    use crate::semialg::decompose;

    fn one_chart(c: TriangularChart, alpha: MultiIndex) -> Resolution {
        Resolution {
            ambient: 1,
            alpha,
            box_n: 1,
            density: 0.0,
            domain: Domain::Interval {
                lo: rat(0, 1),
                hi: rat(1, 1),
            },
            functions: vec![],
            charts: vec![ChartRecord {
                chart: c,
                provenance: vec![],
                source: "test".into(),
                norm: None,
                converged: None,
            }],
            inverses: vec![],
            estimates: vec![],
        }
    }

    #[test]
    fn identity_passes_and_doubling_fails() {
        let ok = check_norms(
            &one_chart(TriangularChart::identity(1), MultiIndex(vec![3])),
            1e-6,
        )
        .unwrap();
        assert!(ok.passed && (ok.measured - 1.0).abs() < 1e-12);
        let two =
            TriangularChart::new(1, vec![ChartExpr::affine(vec![rat(2, 1)], rat(0, 1))]).unwrap();
        assert!(
            !check_norms(&one_chart(two, MultiIndex(vec![1])), 1e-6)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn half_square_estimate() {
        let g = ChartExpr::from_poly(&parse_poly("1/2*x1^2", 1).unwrap());
        let (a, b) = check_estimate_eq1(&g, 1).unwrap();
        assert!(a.passed && b.passed);
        assert!(a.measured < 1.0);
    }

    #[test]
    fn disk_cells_are_sign_invariant() {
        let p = Presentation::from_text(2, 1, &[&[("x1^2 + x2^2 - 1", Rel::Lt)]]).unwrap();
        let d = decompose(&p).unwrap();
        let g = check_sign_invariance(&p, &d, 100).unwrap();
        assert!(g.passed && g.checked >= 100);
        assert!(check_membership_grid(&p, &d, 40).unwrap().passed);
    }
}
