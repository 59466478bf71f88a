use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use super::eval::jets_at;
use super::expr::ChartExpr;
use super::multiindex::MultiIndex;
use crate::error::{Error, Result};

/// Environment variable capping the worker threads used for grid sweeps.
pub const THREADS_ENV: &str = "GROMOV_PARAM_THREADS";

fn pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()
    })
    .as_ref()
}

/// Run `f` on the worker pool; falls back to rayon's global pool where
/// threads cannot be spawned.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match pool() {
        Some(p) => p.install(f),
        None => f(),
    }
}

/// Nested grids: level `k` has `2^k + 1` points per axis, with the two end
/// points moved inside the open cube by `edge`.
#[derive(Clone, Debug, Serialize)]
pub struct NormPolicy {
    pub start_level: u32,
    pub max_level: u32,
    pub rel_tol: f64,
    pub edge: f64,
}

impl NormPolicy {
    pub fn for_dim(l: usize) -> Self {
        match l {
            0 | 1 => NormPolicy {
                start_level: 6,
                max_level: 11,
                rel_tol: 1e-4,
                edge: 1e-12,
            },
            2 => NormPolicy {
                start_level: 3,
                max_level: 6,
                rel_tol: 1e-4,
                edge: 1e-9,
            },
            _ => NormPolicy {
                start_level: 2,
                max_level: 4,
                rel_tol: 1e-3,
                edge: 1e-9,
            },
        }
    }

    /// A finer sweep for independent checks.
    pub fn refined(l: usize) -> Self {
        let mut p = Self::for_dim(l);
        p.max_level += 1;
        p.rel_tol /= 10.0;
        p
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelRecord {
    pub level: u32,
    pub points: usize,
    pub estimate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub estimate: f64,
    /// Largest `|D^β f|` over the functions, per `β ⪯ α`.
    pub per_beta: Vec<(MultiIndex, f64)>,
    pub levels: Vec<LevelRecord>,
    pub converged: bool,
}

fn coord(j: usize, n: usize, edge: f64) -> f64 {
    if j == 0 {
        edge
    } else if j == n {
        1.0 - edge
    } else {
        j as f64 / n as f64
    }
}

/// Grid points first present at `level` (all points at the first level).
fn new_points(l: usize, level: u32, first: bool, edge: f64) -> Vec<Vec<f64>> {
    let n = 1usize << level;
    let mut out = Vec::new();
    let mut idx = vec![0usize; l];
    loop {
        if first || idx.iter().any(|j| j % 2 == 1) {
            out.push(idx.iter().map(|&j| coord(j, n, edge)).collect());
        }
        let mut k = 0;
        loop {
            if k == l {
                return out;
            }
            idx[k] += 1;
            if idx[k] <= n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Per-β maxima of `|D^β f|` over `funcs` at the given points.
pub fn sup_on_points(
    funcs: &[ChartExpr],
    points: &[Vec<f64>],
    betas: &[MultiIndex],
    order: u32,
) -> Result<Vec<f64>> {
    let rows: Vec<Vec<f64>> = install(|| {
        points
            .par_iter()
            .map(|p| {
                let jets = jets_at(funcs, p, order)?;
                let mut row = vec![0.0f64; betas.len()];
                for j in &jets {
                    for (k, b) in betas.iter().enumerate() {
                        let v = j.derivative(b.as_slice()).abs();
                        if !v.is_finite() {
                            return Err(Error::Eval(format!("non-finite derivative at {p:?}")));
                        }
                        row[k] = row[k].max(v);
                    }
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut best = vec![0.0f64; betas.len()];
    for r in rows {
        for (b, v) in best.iter_mut().zip(r) {
            *b = b.max(v);
        }
    }
    Ok(best)
}

/// Grid estimate of `max_i ‖f_i‖_α` on `(0,1)^l`; nondecreasing in the level.
pub fn norm_estimate(
    funcs: &[ChartExpr],
    l: usize,
    alpha: &MultiIndex,
    policy: &NormPolicy,
) -> Result<NormReport> {
    if alpha.dim() != l {
        return Err(Error::LengthMismatch(alpha.dim(), l));
    }
    let betas = alpha.down_set();
    let order = alpha.weight();
    if l == 0 {
        let best = sup_on_points(funcs, &[vec![]], &betas, 0)?;
        let est = best.iter().cloned().fold(0.0, f64::max);
        return Ok(NormReport {
            estimate: est,
            per_beta: betas.into_iter().zip(best).collect(),
            levels: vec![LevelRecord {
                level: 0,
                points: 1,
                estimate: est,
            }],
            converged: true,
        });
    }
    let mut best = vec![0.0f64; betas.len()];
    let mut levels = Vec::new();
    let mut converged = false;
    let mut prev = f64::NAN;
    for level in policy.start_level..=policy.max_level {
        let pts = new_points(l, level, level == policy.start_level, policy.edge);
        let row = sup_on_points(funcs, &pts, &betas, order)?;
        for (b, v) in best.iter_mut().zip(row) {
            *b = b.max(v);
        }
        let est = best.iter().cloned().fold(0.0, f64::max);
        levels.push(LevelRecord {
            level,
            points: (1usize << level) + 1,
            estimate: est,
        });
        if level > policy.start_level && (est - prev).abs() <= policy.rel_tol * est.max(1.0) {
            converged = true;
            break;
        }
        prev = est;
    }
    Ok(NormReport {
        estimate: best.iter().cloned().fold(0.0, f64::max),
        per_beta: betas.into_iter().zip(best).collect(),
        levels,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_poly;

    #[test]
    fn nested_grids_do_not_repeat_points() {
        let a = new_points(2, 2, true, 0.0);
        let b = new_points(2, 3, false, 0.0);
        assert_eq!(a.len(), 25);
        assert_eq!(a.len() + b.len(), 81);
    }

    #[test]
    fn norm_of_square() {
        let f = ChartExpr::from_poly(&parse_poly("x1^2", 1).unwrap());
        let r = norm_estimate(&[f], 1, &MultiIndex(vec![2]), &NormPolicy::for_dim(1)).unwrap();
        assert!((r.estimate - 2.0).abs() < 1e-9);
        assert!(r.converged);
        let w: Vec<f64> = r.levels.iter().map(|l| l.estimate).collect();
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn mixed_norm_in_the_square() {
        let f = ChartExpr::from_poly(&parse_poly("x1*x2", 2).unwrap());
        let r = norm_estimate(
            &[f.clone()],
            2,
            &MultiIndex(vec![1, 0]),
            &NormPolicy::for_dim(2),
        )
        .unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-6);
        let r = norm_estimate(&[f], 2, &MultiIndex(vec![1, 1]), &NormPolicy::for_dim(2)).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-6);
    }
}
