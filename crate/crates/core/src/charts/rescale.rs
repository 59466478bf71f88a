use super::chart::TriangularChart;
use super::expr::ChartExpr;
use super::multiindex::MultiIndex;
use super::norm::{norm_estimate, NormPolicy, NormReport};
use crate::error::{Error, Result};
use crate::kernel::{rat, Rational};

/// Axes along which some `β ⪯ α` differentiates.
pub fn relevant_axes(alpha: &MultiIndex) -> Vec<usize> {
    let down = alpha.down_set();
    (0..alpha.dim())
        .filter(|&i| down.iter().any(|b| b.0[i] > 0))
        .collect()
}

/// Pieces per axis for a bound `K`.
pub fn pieces_for(k: f64) -> Result<u32> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::NonConvergent(format!("norm estimate {k}")));
    }
    let p = (k - 1e-9).ceil().max(1.0);
    if p > u32::MAX as f64 {
        return Err(Error::LimitExceeded(format!("{p} pieces per axis")));
    }
    Ok(p as u32)
}

/// The `k^|axes|` affine charts that cut `(0,1)^l` into equal boxes along `axes`.
pub fn unit_pieces(
    l: usize,
    axes: &[usize],
    k: u32,
    max_charts: usize,
) -> Result<Vec<TriangularChart>> {
    let total = (k as u128)
        .checked_pow(axes.len() as u32)
        .unwrap_or(u128::MAX);
    if total > max_charts as u128 {
        return Err(Error::LimitExceeded(format!(
            "rescaling would need {total} charts"
        )));
    }
    let mut out = Vec::new();
    let mut idx = vec![0u32; axes.len()];
    loop {
        let mut lo: Vec<Rational> = vec![rat(0, 1); l];
        let mut hi: Vec<Rational> = vec![rat(1, 1); l];
        for (a, &j) in axes.iter().zip(&idx) {
            lo[*a] = rat(j as i64, k as i64);
            hi[*a] = rat(j as i64 + 1, k as i64);
        }
        out.push(TriangularChart::affine_box(&lo, &hi));
        let mut p = 0;
        loop {
            if p == idx.len() {
                return Ok(out);
            }
            idx[p] += 1;
            if idx[p] < k {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

pub struct Rescaled {
    pub pieces: Vec<TriangularChart>,
    pub per_axis: u32,
    pub report: NormReport,
}

/// Cut `(0,1)^l` so that every function, pulled back to each piece, has
/// `C^α` norm at most one. The functions must take values in `[-1, 1]`.
pub fn rescale_to_unit(
    funcs: &[ChartExpr],
    l: usize,
    alpha: &MultiIndex,
    policy: &NormPolicy,
    max_charts: usize,
) -> Result<Rescaled> {
    let report = norm_estimate(funcs, l, alpha, policy)?;
    let k = pieces_for(report.estimate)?;
    let pieces = unit_pieces(l, &relevant_axes(alpha), k, max_charts)?;
    Ok(Rescaled {
        pieces,
        per_axis: k,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_poly;

    #[test]
    fn square_needs_two_pieces() {
        let f = ChartExpr::from_poly(&parse_poly("x1^2", 1).unwrap());
        let a = MultiIndex(vec![2]);
        let r = rescale_to_unit(&[f.clone()], 1, &a, &NormPolicy::for_dim(1), 1000).unwrap();
        assert_eq!(r.pieces.len(), 2);
        for p in &r.pieces {
            let g = p.pullback(&f).unwrap();
            let n = norm_estimate(&[g], 1, &a, &NormPolicy::for_dim(1)).unwrap();
            assert!(n.estimate <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn axes_and_counts() {
        assert_eq!(relevant_axes(&MultiIndex(vec![1, 0])), vec![0]);
        assert_eq!(relevant_axes(&MultiIndex(vec![1, 1])), vec![0, 1]);
        assert_eq!(unit_pieces(2, &[0, 1], 3, 100).unwrap().len(), 9);
        assert!(unit_pieces(2, &[0, 1], 30, 100).is_err());
        assert_eq!(pieces_for(2.0).unwrap(), 2);
        assert_eq!(pieces_for(0.5).unwrap(), 1);
    }
}
