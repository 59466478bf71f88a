//! Resolutions over the unit square: sets via their slices, and the
//! planar steps for functions.

use std::slice::from_ref;

use crate::charts::{
    norm_estimate, BranchNode, ChartExpr, ChartRecord, Domain, InverseRecord, MultiIndex,
    NormPolicy, Resolution, TriangularChart,
};
use crate::error::{Error, Result};
use crate::kernel::MultiPoly;
use crate::semialg::{
    box_interval, decompose, slices_of, BaseCell1D, FiberPart, Presentation, Rel, SignCondition,
    Slice,
};

use super::cells::{base_map, bound_expr, slice_label};
use super::interval::{resolve_family_1d, Piece1D};
use super::{settle_chart, Limits, NashInput};

/// Density achieved by shrinking to the box `(1/n, 1 - 1/n)^d`.
pub fn box_density(d: usize, n: u32) -> f64 {
    if n <= 1 {
        0.0
    } else {
        (d as f64).sqrt() / n as f64
    }
}

/// `e ∘ h`, with `h` a one-variable chart moved to context variable `var`.
fn along(e: &ChartExpr, h: &ChartExpr, var: usize) -> Result<ChartExpr> {
    let hv = h.substitute(&[ChartExpr::var(var)])?;
    e.substitute(from_ref(&hv))
}

fn extend(prov: &mut Vec<String>, more: &[String]) {
    for t in more {
        if prov.last() != Some(t) {
            prov.push(t.clone());
        }
    }
}

/// Charts over one slice before normalization. The boundary functions of
/// sectors and sections are resolved at order `r` first.
pub(crate) fn raw_slice_charts(
    slice: &Slice,
    r: u32,
    limits: &Limits,
) -> Result<Vec<(TriangularChart, Vec<String>)>> {
    let cell = vec!["cell".to_string()];
    let mut out = Vec::new();
    match (&slice.fiber, &slice.base) {
        (FiberPart::Sector { lower, upper }, BaseCell1D::Open { .. }) => {
            let y = base_map(&slice.base, 0);
            let lo = bound_expr(lower, slice, &y)?;
            let hi = bound_expr(upper, slice, &y)?;
            for h in resolve_family_1d(&[lo.clone(), hi.clone()], r.max(1), limits)? {
                let comps = vec![
                    ChartExpr::blend(
                        ChartExpr::var(0),
                        along(&hi, &h.chart, 1)?,
                        along(&lo, &h.chart, 1)?,
                    ),
                    along(&y, &h.chart, 1)?,
                ];
                let mut prov = cell.clone();
                extend(&mut prov, &h.provenance);
                out.push((TriangularChart::new(2, comps)?, prov));
            }
        }
        (FiberPart::Section { graph }, BaseCell1D::Open { .. }) => {
            let y = base_map(&slice.base, 0);
            let g = bound_expr(graph, slice, &y)?;
            for h in resolve_family_1d(from_ref(&g), r.max(1), limits)? {
                let comps = vec![along(&g, &h.chart, 0)?, along(&y, &h.chart, 0)?];
                let mut prov = cell.clone();
                extend(&mut prov, &h.provenance);
                out.push((TriangularChart::new(1, comps)?, prov));
            }
        }
        _ => out.push((super::cells::slice_chart(slice)?, cell)),
    }
    Ok(out)
}

/// Charts over one slice, rescaled so that they and the pullbacks of
/// `funcs` have norm at most one with respect to `alpha`.
pub(crate) fn slice_charts(
    slice: &Slice,
    source: &str,
    funcs: &[ChartExpr],
    alpha: &MultiIndex,
    limits: &Limits,
    out: &mut Vec<ChartRecord>,
) -> Result<()> {
    for (chart, prov) in raw_slice_charts(slice, alpha.weight(), limits)? {
        settle_chart(chart, prov, source, funcs, alpha, limits, out)?;
    }
    Ok(())
}

/// Resolution of the set restricted to the box `(1/n, 1 - 1/n)^d`: every
/// chart and its derivatives of order up to `alpha` are bounded by one, and
/// the images are within `sqrt(d)/n` of every point of the set.
pub fn epsilon_resolution_set(
    pres: &Presentation,
    alpha: &MultiIndex,
    n: u32,
    limits: &Limits,
) -> Result<Resolution> {
    let d = pres.vars();
    if d > 2 {
        return Err(Error::Unsupported(format!("resolutions in dimension {d}")));
    }
    if alpha.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "multi-index {alpha} for a set in {d} variables"
        )));
    }
    let shrunk = pres.with_box(n)?;
    let decomp = decompose(&shrunk)?;
    let slices = slices_of(&shrunk, &decomp)?;
    let mut charts = Vec::new();
    for (i, s) in slices.iter().enumerate() {
        slice_charts(s, &slice_label(i, s), &[], alpha, limits, &mut charts)?;
    }
    Ok(Resolution {
        ambient: d,
        alpha: alpha.clone(),
        box_n: n,
        density: box_density(d, n),
        domain: Domain::Set(shrunk),
        functions: Vec::new(),
        charts,
        inverses: Vec::new(),
        estimates: Vec::new(),
    })
}

/// Charts from the first-derivative split of a planar function.
#[derive(Clone, Debug)]
pub struct StepOne {
    /// Charts covering the part where `|∂x1 f| <= 1`.
    pub minus: Vec<(TriangularChart, Vec<String>, String)>,
    /// Inverse charts covering the part where `|∂x1 f| > 1`.
    pub plus: Vec<(TriangularChart, Vec<String>, String)>,
    pub inverses: Vec<InverseRecord>,
}

fn first_derivative_split(f: &MultiPoly, n: u32) -> Result<(Presentation, Presentation)> {
    let fx = f.derivative(0)?;
    let q = &(&fx * &fx) - &MultiPoly::one(2);
    if q.is_zero() {
        let whole = Presentation::new(2, n, vec![vec![]])?;
        return Ok((whole, Presentation::new(2, n, vec![])?));
    }
    let minus = Presentation::new(
        2,
        n,
        vec![
            vec![SignCondition::new(q.clone(), Rel::Lt)?],
            vec![SignCondition::new(q.clone(), Rel::Eq)?],
        ],
    )?;
    let plus = Presentation::new(2, n, vec![vec![SignCondition::new(q, Rel::Gt)?]])?;
    Ok((minus, plus))
}

/// Inverse charts `(t, w) -> (f(., y)^-1(T), y)` over a sector on which
/// `|∂x1 f| > 1`, with `T` running between the boundary values of `f`, so
/// that `f` composed with the chart is exactly `T`.
fn inverse_charts(
    f: &ChartExpr,
    slice: &Slice,
    r: u32,
    limits: &Limits,
    source: &str,
    step: &mut StepOne,
) -> Result<()> {
    let FiberPart::Sector { lower, upper } = &slice.fiber else {
        return Err(Error::DegenerateCell(format!(
            "{source}: expected a sector"
        )));
    };
    let open = matches!(slice.base, BaseCell1D::Open { .. });
    let y = base_map(&slice.base, 0);
    let lo = bound_expr(lower, slice, &y)?;
    let hi = bound_expr(upper, slice, &y)?;
    let flo = f.substitute(&[lo.clone(), y.clone()])?;
    let fhi = f.substitute(&[hi.clone(), y.clone()])?;
    let fiber = ChartExpr::sub(
        &f.substitute(&[ChartExpr::var(0), ChartExpr::var(2)])?,
        &ChartExpr::var(1),
    );
    let pieces = if open {
        resolve_family_1d(
            &[lo.clone(), hi.clone(), flo.clone(), fhi.clone()],
            r.max(1),
            limits,
        )?
    } else {
        vec![Piece1D {
            chart: ChartExpr::var(0),
            provenance: Vec::new(),
            norm: f64::NAN,
            converged: true,
        }]
    };
    for h in pieces {
        let on = |e: &ChartExpr| {
            if open {
                along(e, &h.chart, 1)
            } else {
                Ok(e.clone())
            }
        };
        let (yv, lov, hiv) = (on(&y)?, on(&lo)?, on(&hi)?);
        let t = ChartExpr::blend(ChartExpr::var(0), on(&fhi)?, on(&flo)?);
        let x = ChartExpr::branch(BranchNode {
            fiber: fiber.clone(),
            params: vec![t.clone(), yv.clone()],
            lo: lov,
            hi: hiv,
            index: 0,
            count: Some(1),
        })?;
        let chart = TriangularChart::new(if open { 2 } else { 1 }, vec![x, yv])?;
        let mut prov = vec!["c1-split".to_string(), "inverse".to_string()];
        extend(&mut prov, &h.provenance);
        step.inverses.push(InverseRecord {
            chart: chart.clone(),
            function: f.clone(),
            target: t,
        });
        step.plus.push((chart, prov, source.to_string()));
    }
    Ok(())
}

/// Split the box `(1/n, 1 - 1/n)^2` where `|∂x1 f|` crosses one. Where it
/// is at most one, cell charts with boundaries resolved at order `r`; where
/// it exceeds one, inverse charts along the fibers.
pub fn split_by_first_derivative(
    f: &MultiPoly,
    n: u32,
    r: u32,
    limits: &Limits,
) -> Result<StepOne> {
    if f.nvars() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a function of two variables, got {}",
            f.nvars()
        )));
    }
    let fe = ChartExpr::from_poly(f);
    let (lo, hi) = box_interval(n)?;
    let bx = TriangularChart::affine_box(&[lo.clone(), lo.clone()], &[hi.clone(), hi]);
    let sup = norm_estimate(
        &[bx.pullback(&fe)?],
        2,
        &MultiIndex(vec![0, 0]),
        &NormPolicy::for_dim(2),
    )?
    .estimate;
    if sup > 1.0 + limits.slack {
        return Err(Error::Invalid(format!(
            "function reaches {sup:.6} in absolute value; values must lie in [-1, 1]"
        )));
    }
    let (minus, plus) = first_derivative_split(f, n)?;
    let mut step = StepOne {
        minus: Vec::new(),
        plus: Vec::new(),
        inverses: Vec::new(),
    };
    let decomp = decompose(&minus)?;
    for (i, s) in slices_of(&minus, &decomp)?.iter().enumerate() {
        let source = format!("minus {}", slice_label(i, s));
        for (c, p) in raw_slice_charts(s, r, limits).map_err(|e| step_failed(&source, e))? {
            step.minus.push((c, p, source.clone()));
        }
    }
    let decomp = decompose(&plus)?;
    for (i, s) in slices_of(&plus, &decomp)?.iter().enumerate() {
        let source = format!("plus {}", slice_label(i, s));
        inverse_charts(&fe, s, r, limits, &source, &mut step)
            .map_err(|e| step_failed(&source, e))?;
    }
    Ok(step)
}

fn step_failed(source: &str, e: Error) -> Error {
    match e {
        Error::StepFailed { .. } => e,
        e => Error::StepFailed {
            slice: source.to_string(),
            msg: e.to_string(),
        },
    }
}

/// Resolution of a polynomial function on the box `(1/n, 1 - 1/n)^2`:
/// charts and the composites `f ∘ φ` have norm at most one with respect to
/// `alpha`. The function must take values in `[-1, 1]` there.
pub fn epsilon_resolution_fn(
    f: &NashInput,
    alpha: &MultiIndex,
    n: u32,
    limits: &Limits,
) -> Result<Resolution> {
    let NashInput::Poly(p) = f else {
        return Err(Error::Unsupported(
            "planar function resolutions take polynomial inputs".into(),
        ));
    };
    if p.nvars() != 2 || alpha.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected two variables, got {} and multi-index {alpha}",
            p.nvars()
        )));
    }
    let fe = ChartExpr::from_poly(p);
    let step = split_by_first_derivative(p, n, alpha.weight(), limits)?;
    let funcs = [fe.clone()];
    let mut charts = Vec::new();
    for (c, prov, source) in step.minus.into_iter().chain(step.plus) {
        settle_chart(c, prov, &source, &funcs, alpha, limits, &mut charts)
            .map_err(|e| step_failed(&source, e))?;
    }
    Ok(Resolution {
        ambient: 2,
        alpha: alpha.clone(),
        box_n: n,
        density: box_density(2, n),
        domain: Domain::Set(Presentation::new(2, n, vec![vec![]])?),
        functions: vec![fe],
        charts,
        inverses: step.inverses,
        estimates: Vec::new(),
    })
}
