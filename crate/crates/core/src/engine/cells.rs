//! Charts for the slices of a cylindrical decomposition.

use crate::charts::{
    BranchNode, ChartExpr, ChartRecord, Domain, MultiIndex, Resolution, TriangularChart,
};
use crate::error::{Error, Result};
use crate::kernel::Rational;
use crate::semialg::{decompose, slices_of, BaseCell1D, Bound, FiberPart, Presentation, Slice};

/// `t -> lo + (hi - lo) t` over a base cell, in context variable `var`.
pub fn base_map(cell: &BaseCell1D, var: usize) -> ChartExpr {
    match cell {
        BaseCell1D::Open { lo, hi } => ChartExpr::blend(
            ChartExpr::var(var),
            ChartExpr::algebraic(hi.clone()),
            ChartExpr::algebraic(lo.clone()),
        ),
        BaseCell1D::Point { at } => ChartExpr::algebraic(at.clone()),
    }
}

/// A fiber boundary as a function of the base expression `y`.
pub fn bound_expr(b: &Bound, slice: &Slice, y: &ChartExpr) -> Result<ChartExpr> {
    bound_expr_in(b, &slice.interval(), y)
}

/// Same as [`bound_expr`] with an explicit fiber interval.
pub fn bound_expr_in(
    b: &Bound,
    interval: &(Rational, Rational),
    y: &ChartExpr,
) -> Result<ChartExpr> {
    Ok(match b {
        Bound::BoxBottom => ChartExpr::constant(interval.0.clone()),
        Bound::BoxTop => ChartExpr::constant(interval.1.clone()),
        Bound::Point { at } => ChartExpr::algebraic(at.clone()),
        Bound::Branch(nb) => ChartExpr::branch(BranchNode {
            fiber: ChartExpr::from_poly(&nb.fiber),
            params: vec![y.clone()],
            lo: ChartExpr::constant(nb.fiber_lo.clone()),
            hi: ChartExpr::constant(nb.fiber_hi.clone()),
            index: nb.index,
            count: Some(nb.count),
        })?,
    })
}

/// The chart of one slice: sectors `(x, w) -> (L + (U - L) x, y(w))`,
/// sections `w -> (B(y(w)), y(w))`, and their analogues over points.
pub fn slice_chart(slice: &Slice) -> Result<TriangularChart> {
    match (&slice.fiber, &slice.base) {
        (FiberPart::Whole, BaseCell1D::Open { .. }) => {
            TriangularChart::new(1, vec![base_map(&slice.base, 0)])
        }
        (FiberPart::Whole, BaseCell1D::Point { .. }) => {
            TriangularChart::new(0, vec![base_map(&slice.base, 0)])
        }
        (FiberPart::Sector { lower, upper }, BaseCell1D::Open { .. }) => {
            let y = base_map(&slice.base, 1);
            let l = bound_expr(lower, slice, &y)?;
            let u = bound_expr(upper, slice, &y)?;
            TriangularChart::new(2, vec![ChartExpr::blend(ChartExpr::var(0), u, l), y])
        }
        (FiberPart::Section { graph }, BaseCell1D::Open { .. }) => {
            let y = base_map(&slice.base, 0);
            TriangularChart::new(1, vec![bound_expr(graph, slice, &y)?, y])
        }
        (FiberPart::Sector { lower, upper }, BaseCell1D::Point { .. }) => {
            let y = base_map(&slice.base, 0);
            let l = bound_expr(lower, slice, &y)?;
            let u = bound_expr(upper, slice, &y)?;
            TriangularChart::new(1, vec![ChartExpr::blend(ChartExpr::var(0), u, l), y])
        }
        (FiberPart::Section { graph }, BaseCell1D::Point { .. }) => {
            let y = base_map(&slice.base, 0);
            TriangularChart::new(0, vec![bound_expr(graph, slice, &y)?, y])
        }
    }
}

pub(crate) fn slice_label(i: usize, s: &Slice) -> String {
    let kind = match s.fiber {
        FiberPart::Whole => "cell",
        FiberPart::Sector { .. } => "sector",
        FiberPart::Section { .. } => "section",
    };
    format!("slice {i} ({kind}, dim {})", s.dim())
}

/// Charts with no derivative control whose images are exactly the slices
/// of the set inside its box.
pub fn cells_resolution(pres: &Presentation) -> Result<Resolution> {
    if pres.vars() > 2 {
        return Err(Error::Unsupported(format!(
            "cell charts in dimension {}",
            pres.vars()
        )));
    }
    let decomp = decompose(pres)?;
    let slices = slices_of(pres, &decomp)?;
    let charts = slices
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(ChartRecord {
                chart: slice_chart(s)?,
                provenance: vec!["cell".into()],
                source: slice_label(i, s),
                norm: None,
                converged: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Resolution {
        ambient: pres.vars(),
        alpha: MultiIndex::zero(pres.vars()),
        box_n: pres.box_n(),
        density: 0.0,
        domain: Domain::Set(pres.clone()),
        functions: Vec::new(),
        charts,
        inverses: Vec::new(),
        estimates: Vec::new(),
    })
}
