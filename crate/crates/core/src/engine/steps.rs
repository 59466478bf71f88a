//! The square substitution along fibers and the argmax step for the next
//! derivative.

use std::slice::from_ref;

use crate::charts::{
    mi_succ, norm_estimate, sup_on_points, ChartExpr, MultiIndex, NormPolicy, TriangularChart,
};
use crate::error::{Error, Result};
use crate::kernel::{rat, MultiPoly};
use crate::semialg::{box_interval, cad_plane, BaseCell1D, Bound, Column};

use super::cells::{base_map, bound_expr_in};
use super::interval::resolve_family_1d;
use super::Limits;

/// A sector `lower(w) < x1 < upper(w)` over `y = base(w)`, with a function
/// of `(x1, y)` on it. All three boundary maps are functions of `w`.
#[derive(Clone, Debug)]
pub struct SliceJob {
    pub base: ChartExpr,
    pub lower: ChartExpr,
    pub upper: ChartExpr,
    pub f: ChartExpr,
}

#[derive(Clone, Debug)]
pub struct StepTwo {
    pub charts: Vec<(TriangularChart, Vec<String>)>,
    /// Largest `‖ψ‖_{s+1}` over the charts, before any rescaling.
    pub chart_norm: f64,
    /// Largest `|∂^{s+1}_{v1}(f ∘ ψ)|` seen on the sample grid.
    pub bound: f64,
}

fn grid(l: usize, k: usize) -> Vec<Vec<f64>> {
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

fn along(e: &ChartExpr, h: &ChartExpr, var: usize) -> Result<ChartExpr> {
    e.substitute(from_ref(&h.substitute(&[ChartExpr::var(var)])?))
}

/// Charts `ψ(v, w) = (ζ(h(w))(1 - v^2) + η(h(w)) v^2, base(h(w)))` with `h`
/// running over a resolution of the boundary maps at order `s + 1`.
pub fn square_substitution_step(job: &SliceJob, s: u32, limits: &Limits) -> Result<StepTwo> {
    if s == 0 {
        return Err(Error::Invalid("order s must be at least 1".into()));
    }
    let family = [job.lower.clone(), job.upper.clone(), job.base.clone()];
    let mut out = StepTwo {
        charts: Vec::new(),
        chart_norm: 0.0,
        bound: 0.0,
    };
    let beta = MultiIndex(vec![s + 1, 0]);
    for h in resolve_family_1d(&family, s + 1, limits)? {
        let x = ChartExpr::blend(
            ChartExpr::square(ChartExpr::var(0)),
            along(&job.upper, &h.chart, 1)?,
            along(&job.lower, &h.chart, 1)?,
        );
        let chart = TriangularChart::new(2, vec![x, along(&job.base, &h.chart, 1)?])?;
        let rep = norm_estimate(
            chart.components(),
            2,
            &MultiIndex::top(2, s + 1),
            &NormPolicy::for_dim(2),
        )?;
        out.chart_norm = out.chart_norm.max(rep.estimate);
        let fc = chart.pullback(&job.f)?;
        out.bound = out
            .bound
            .max(sup_on_points(from_ref(&fc), &grid(2, 40), from_ref(&beta), s + 1)?[0]);
        let mut prov = h.provenance.clone();
        prov.push("square-subst".into());
        out.charts.push((chart, prov));
    }
    Ok(out)
}

/// Candidate curves for the fiberwise maximum of `|d|` over the box
/// `(1/n, 1 - 1/n)^2`: the critical branches of `∂x1 d` and the two box
/// edges, per base cell.
pub fn argmax_candidates(d: &MultiPoly, n: u32) -> Result<Vec<Column>> {
    let (lo, hi) = box_interval(n)?;
    let dx = d.derivative(0)?;
    let polys = if dx.is_constant() { vec![] } else { vec![dx] };
    let decomp = cad_plane(&polys, &lo, &hi)?;
    Ok(decomp
        .columns
        .into_iter()
        .filter(|c| matches!(c.base, BaseCell1D::Open { .. }))
        .map(|mut c| {
            c.bounds.insert(0, Bound::BoxBottom);
            c.bounds.push(Bound::BoxTop);
            c
        })
        .collect())
}

/// The candidates attaining the fiberwise maximum of `|d|` over each open
/// base cell, decided at a sample point of the cell. Ties keep every
/// maximizer.
pub fn argmax_curves(d: &MultiPoly, n: u32) -> Result<Vec<(BaseCell1D, Vec<Bound>)>> {
    let iv = box_interval(n)?;
    let mut out = Vec::new();
    for col in argmax_candidates(d, n)? {
        let y = col
            .base
            .sample()
            .ok_or_else(|| Error::DegenerateCell("open base cell without a sample".into()))?;
        let yf = crate::kernel::rational_to_f64(&y);
        let vals = col
            .bounds
            .iter()
            .map(|b| Ok(d.eval_f64(&[b.value_at(&y, &iv)?.to_f64(), yf]).abs()))
            .collect::<Result<Vec<f64>>>()?;
        let top = vals.iter().cloned().fold(0.0, f64::max);
        let keep = col
            .bounds
            .iter()
            .zip(&vals)
            .filter(|(_, &v)| v >= top - 1e-9 * top.max(1.0))
            .map(|(b, _)| b.clone())
            .collect();
        out.push((col.base, keep));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct StepThree {
    /// The successor multi-index whose derivative is controlled.
    pub beta: MultiIndex,
    pub charts: Vec<(TriangularChart, Vec<String>)>,
    /// Argmax curves as functions of the base cell coordinate.
    pub curves: Vec<ChartExpr>,
    /// Largest `|∂^β(f ∘ φ)|` seen on the sample grid.
    pub bound: f64,
}

/// Charts `φ(x1, y) = (1/n + b_n x1, h(y))`, `b_n = 1 - 2/n`, with `h`
/// resolving the argmax curves of `|∂^β f|` together with the matching
/// fiber derivative of `f` along them, where `β` succeeds `alpha`.
pub fn next_derivative_step(
    f: &MultiPoly,
    alpha: &MultiIndex,
    n: u32,
    limits: &Limits,
) -> Result<StepThree> {
    if f.nvars() != 2 || alpha.dim() != 2 {
        return Err(Error::DimensionMismatch(
            "the argmax step works in two variables".into(),
        ));
    }
    let beta = mi_succ(alpha);
    let mut d = f.clone();
    for (v, &k) in beta.as_slice().iter().enumerate() {
        for _ in 0..k {
            d = d.derivative(v)?;
        }
    }
    let mut g = f.clone();
    for _ in 0..beta.as_slice()[0] {
        g = g.derivative(0)?;
    }
    let iv = box_interval(n)?;
    let bn = rat(1, 1) - rat(2, n as i64);
    let first = ChartExpr::affine(vec![bn], iv.0.clone());
    let fe = ChartExpr::from_poly(f);
    let ge = ChartExpr::from_poly(&g);
    let mut out = StepThree {
        beta: beta.clone(),
        charts: Vec::new(),
        curves: Vec::new(),
        bound: 0.0,
    };
    let r = alpha.weight().max(1);
    for (base, curves) in argmax_curves(&d, n)? {
        let y = base_map(&base, 0);
        for b in curves {
            let sigma = bound_expr_in(&b, &iv, &y)?;
            let gs = ge.substitute(&[sigma.clone(), y.clone()])?;
            let scale = norm_estimate(
                from_ref(&gs),
                1,
                &MultiIndex(vec![0]),
                &NormPolicy::for_dim(1),
            )?
            .estimate
            .max(1.0);
            let gs = ChartExpr::mul(
                &gs,
                &ChartExpr::constant(crate::kernel::rational_from_f64(1.0 / scale)),
            );
            for h in resolve_family_1d(&[sigma.clone(), gs], r, limits)? {
                let chart = TriangularChart::new(2, vec![first.clone(), along(&y, &h.chart, 1)?])?;
                let fc = chart.pullback(&fe)?;
                out.bound = out.bound.max(
                    sup_on_points(from_ref(&fc), &grid(2, 40), from_ref(&beta), beta.weight())?[0],
                );
                let mut prov = h.provenance.clone();
                prov.push("argmax".into());
                out.charts.push((chart, prov));
            }
            out.curves.push(sigma);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{eval_f64, jets_at, BranchNode};
    use crate::kernel::parse_poly;

    fn e1(s: &str) -> ChartExpr {
        ChartExpr::from_poly(&parse_poly(s, 1).unwrap())
    }

    #[test]
    fn unit_sector_square_substitution() {
        let job = SliceJob {
            base: e1("x1"),
            lower: e1("0"),
            upper: e1("1"),
            f: ChartExpr::var(0),
        };
        let st = square_substitution_step(&job, 1, &Limits::default()).unwrap();
        assert_eq!(st.charts.len(), 1);
        let c = &st.charts[0].0;
        let v = c.eval_f64(&[0.3, 0.6]).unwrap();
        assert!((v[0] - 0.09).abs() < 1e-15 && (v[1] - 0.6).abs() < 1e-15);
        assert!((st.bound - 2.0).abs() < 1e-12);
    }

    #[test]
    fn substituted_chart_norm_at_most_two() {
        let job = SliceJob {
            base: e1("x1"),
            lower: e1("1/4*x1"),
            upper: e1("1/2 + 1/4*x1^2"),
            f: ChartExpr::var(0),
        };
        let st = square_substitution_step(&job, 1, &Limits::default()).unwrap();
        assert!(st.chart_norm <= 2.0 + 1e-9, "{}", st.chart_norm);
    }

    #[test]
    fn second_derivative_decay_near_the_lower_boundary() {
        // f = sqrt(x1) on 1/4 < x1 < 1, where |f'| <= 1 and |f''| decreases
        let f = ChartExpr::branch(BranchNode {
            fiber: ChartExpr::from_poly(&parse_poly("x1^2 - x2", 3).unwrap()),
            params: vec![ChartExpr::var(0), ChartExpr::var(1)],
            lo: ChartExpr::constant(rat(0, 1)),
            hi: ChartExpr::constant(rat(2, 1)),
            index: 0,
            count: Some(1),
        })
        .unwrap();
        for i in 1..100 {
            for j in 1..100 {
                let x = 0.25 + 0.75 * i as f64 / 100.0;
                let y = j as f64 / 100.0;
                let d2 = jets_at(from_ref(&f), &[x, y], 2).unwrap()[0]
                    .derivative(&[2, 0])
                    .abs();
                assert!(d2 <= 2.0 / (x - 0.25), "{x} {y}");
            }
        }
    }

    #[test]
    fn product_needs_one_shrunken_chart() {
        let f = parse_poly("x1*x2", 2).unwrap();
        let st = next_derivative_step(&f, &MultiIndex(vec![1, 0]), 10, &Limits::default()).unwrap();
        assert_eq!(st.beta, MultiIndex(vec![0, 1]));
        assert_eq!(st.charts.len(), 1);
        let fc = st.charts[0].0.pullback(&ChartExpr::from_poly(&f)).unwrap();
        let rep =
            norm_estimate(&[fc], 2, &MultiIndex(vec![0, 2]), &NormPolicy::for_dim(2)).unwrap();
        assert!(rep.estimate <= 1.0);
    }

    #[test]
    fn shrink_factor() {
        let f = parse_poly("x1*x2", 2).unwrap();
        let st = next_derivative_step(&f, &MultiIndex(vec![1, 0]), 4, &Limits::default()).unwrap();
        let c = &st.charts[0].0;
        assert_eq!(
            c.components()[0],
            ChartExpr::affine(vec![rat(1, 2)], rat(1, 4))
        );
    }

    #[test]
    fn critical_line_is_a_candidate() {
        let d = parse_poly("(x1 - 1/2)^2*x2", 2).unwrap();
        let cols = argmax_candidates(&d, 10).unwrap();
        let iv = box_interval(10).unwrap();
        let y = ChartExpr::var(0);
        let hit = cols.iter().any(|c| {
            c.bounds.iter().any(|b| {
                let e = bound_expr_in(b, &iv, &y).unwrap();
                (eval_f64(&e, &[0.5]).unwrap() - 0.5).abs() < 1e-12
            })
        });
        assert!(hit);
        let best = argmax_curves(&d, 10).unwrap();
        assert!(best
            .iter()
            .all(|(_, bs)| bs.iter().all(|b| !matches!(b, Bound::Branch(_)))));
    }
}
