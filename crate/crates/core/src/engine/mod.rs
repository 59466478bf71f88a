//! Construction of chart resolutions: cell charts from the cylindrical
//! decomposition, the one-variable machinery and the planar induction.

pub mod cells;
pub mod interval;
pub mod plane;
pub mod steps;

use serde::Serialize;

use crate::charts::{
    alpha_for, compose, norm_estimate, pieces_for, relevant_axes, unit_pieces, BranchNode,
    ChartExpr, ChartRecord, MultiIndex, NormPolicy, TriangularChart,
};
use crate::error::{Error, Result};
use crate::kernel::{MultiPoly, Rational};

pub use cells::{cells_resolution, slice_chart};
pub use interval::{resolve_family_1d, resolve_interval_c1, resolve_interval_cr, Piece1D};
pub use plane::{
    box_density, epsilon_resolution_fn, epsilon_resolution_set, split_by_first_derivative, StepOne,
};
pub use steps::{
    argmax_candidates, argmax_curves, next_derivative_step, square_substitution_step, SliceJob,
    StepThree, StepTwo,
};

#[derive(Clone, Debug, Serialize)]
pub struct Limits {
    pub max_charts: usize,
    /// Rescaling rounds allowed per chart before giving up.
    pub max_rounds: u32,
    /// Slack on the unit norm bound.
    pub slack: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_charts: 50_000,
            max_rounds: 6,
            slack: 1e-9,
        }
    }
}

/// A Nash function on an open box: a polynomial, or the `index`-th root in
/// `(lo, hi)` of `fiber(z, x_1, ..., x_d)` (with `count` roots there).
#[derive(Clone, Debug)]
pub enum NashInput {
    Poly(MultiPoly),
    Branch {
        fiber: MultiPoly,
        index: usize,
        count: usize,
        lo: Rational,
        hi: Rational,
    },
}

impl NashInput {
    pub fn dim(&self) -> usize {
        match self {
            NashInput::Poly(p) => p.nvars(),
            NashInput::Branch { fiber, .. } => fiber.nvars().saturating_sub(1),
        }
    }

    pub fn expr(&self) -> Result<ChartExpr> {
        match self {
            NashInput::Poly(p) => Ok(ChartExpr::from_poly(p)),
            NashInput::Branch {
                fiber,
                index,
                count,
                lo,
                hi,
            } => {
                if fiber.nvars() < 2 {
                    return Err(Error::DimensionMismatch(
                        "a branch needs the unknown and at least one variable".into(),
                    ));
                }
                ChartExpr::branch(BranchNode {
                    fiber: ChartExpr::from_poly(fiber),
                    params: ChartExpr::vars(fiber.nvars() - 1),
                    lo: ChartExpr::constant(lo.clone()),
                    hi: ChartExpr::constant(hi.clone()),
                    index: *index,
                    count: Some(*count),
                })
            }
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            NashInput::Poly(p) => p.total_degree(),
            NashInput::Branch { fiber, .. } => fiber.total_degree(),
        }
    }
}

/// Rescale `chart` by affine pieces until it and the pullbacks of `funcs`
/// have norm at most one with respect to `alpha` (restricted to the chart
/// dimension), appending the finished charts to `out`.
pub(crate) fn settle_chart(
    chart: TriangularChart,
    provenance: Vec<String>,
    source: &str,
    funcs: &[ChartExpr],
    alpha: &MultiIndex,
    limits: &Limits,
    out: &mut Vec<ChartRecord>,
) -> Result<()> {
    settle_round(chart, provenance, source, funcs, alpha, limits, 0, out)
}

#[allow(clippy::too_many_arguments)]
fn settle_round(
    chart: TriangularChart,
    mut provenance: Vec<String>,
    source: &str,
    funcs: &[ChartExpr],
    alpha: &MultiIndex,
    limits: &Limits,
    round: u32,
    out: &mut Vec<ChartRecord>,
) -> Result<()> {
    let l = chart.l();
    let a = alpha_for(alpha, l);
    let mut fs = chart.components().to_vec();
    for f in funcs {
        fs.push(chart.pullback(f)?);
    }
    let rep = norm_estimate(&fs, l, &a, &NormPolicy::for_dim(l))?;
    if rep.estimate <= 1.0 + limits.slack {
        out.push(ChartRecord {
            chart,
            provenance,
            source: source.to_string(),
            norm: Some(rep.estimate),
            converged: Some(rep.converged),
        });
        if out.len() > limits.max_charts {
            return Err(Error::LimitExceeded(format!(
                "more than {} charts",
                limits.max_charts
            )));
        }
        return Ok(());
    }
    if round >= limits.max_rounds {
        return Err(Error::NonConvergent(format!(
            "{source}: norm {} after {round} rescaling rounds",
            rep.estimate
        )));
    }
    if provenance.last().map(String::as_str) != Some("rescale") {
        provenance.push("rescale".into());
    }
    let k = pieces_for(rep.estimate)?.max(2);
    for lam in unit_pieces(l, &relevant_axes(&a), k, limits.max_charts)? {
        settle_round(
            compose(&chart, &lam)?,
            provenance.clone(),
            source,
            funcs,
            alpha,
            limits,
            round + 1,
            out,
        )?;
    }
    Ok(())
}
