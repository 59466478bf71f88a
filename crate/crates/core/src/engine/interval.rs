//! Resolutions of one-variable functions on an interval.

use std::slice::from_ref;

use crate::charts::eval::refine_root;
use crate::charts::{
    jets_at, norm_estimate, pieces_for, unit_pieces, BranchNode, ChartExpr, ChartRecord, Domain,
    EstimateRecord, InverseRecord, MultiIndex, NormPolicy, Num, Resolution, TriangularChart,
};
use crate::error::{Error, Result};
use crate::kernel::sturm::isolate_upoly;
use crate::kernel::{rat, rational_from_f64, AlgebraicNumber, Rational, UPoly};
use crate::semialg::cad::rational_between;

use super::{Limits, NashInput};

/// A chart `(0,1) -> (0,1)` produced by the one-variable machinery.
#[derive(Clone, Debug)]
pub struct Piece1D {
    pub chart: ChartExpr,
    pub provenance: Vec<String>,
    pub norm: f64,
    pub converged: bool,
}

impl Piece1D {
    fn identity() -> Self {
        Piece1D {
            chart: ChartExpr::var(0),
            provenance: Vec::new(),
            norm: f64::NAN,
            converged: true,
        }
    }
}

/// Side records collected while resolving.
#[derive(Default)]
pub(crate) struct Notes {
    /// `(chart, family member, target)` with `member ∘ chart = target`.
    pub inverses: Vec<(ChartExpr, usize, ChartExpr)>,
    pub estimates: Vec<EstimateRecord>,
}

struct Step {
    k: ChartExpr,
    prov: Vec<&'static str>,
    target: Option<ChartExpr>,
}

const EDGE: f64 = 1e-12;

/// Points of `(0,1)` where one of the sampled functions changes sign,
/// located by bracketing on a uniform grid.
pub(crate) fn sign_changes(f: &dyn Fn(f64) -> Result<Vec<f64>>, n: usize) -> Result<Vec<f64>> {
    let ts: Vec<f64> = (0..=n)
        .map(|j| {
            if j == 0 {
                EDGE
            } else if j == n {
                1.0 - EDGE
            } else {
                j as f64 / n as f64
            }
        })
        .collect();
    let vals = ts.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    let k = vals.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for i in 0..k {
        let scale = vals.iter().map(|v| v[i].abs()).fold(0.0, f64::max);
        let thresh = 1e-10 * scale;
        let mut last: Option<(usize, f64)> = None;
        for (j, v) in vals.iter().enumerate() {
            let x = v[i];
            if x.abs() <= thresh {
                continue;
            }
            if let Some((jp, xp)) = last {
                if (xp > 0.0) != (x > 0.0) {
                    let g = |t: f64| -> Result<f64> { Ok(f(t)?[i]) };
                    out.push(refine_root(&g, ts[jp], ts[j], xp, x)?);
                }
            }
            last = Some((j, x));
        }
    }
    out.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::new();
    for x in out {
        if x <= 1e-9 || x >= 1.0 - 1e-9 {
            continue;
        }
        if merged.last().is_none_or(|&y| x - y > 1e-9) {
            merged.push(x);
        }
    }
    Ok(merged)
}

fn derivative_at(g: &ChartExpr, t: f64, k: u32) -> Result<f64> {
    Ok(jets_at(from_ref(g), &[t], k)?[0].derivative(&[k]))
}

fn as_algebraic(n: &Num) -> AlgebraicNumber {
    match n {
        Num::Rational(q) => AlgebraicNumber::from_rational(q.clone()),
        Num::Algebraic(a) => a.clone(),
    }
}

/// Points of `(0,1)` where `|g'| = 1`: exact for polynomials.
fn c1_points(g: &ChartExpr) -> Result<Vec<Num>> {
    if let Some(p) = g.as_poly() {
        let u = if p.nvars() == 0 {
            UPoly::constant(p.constant_term())
        } else {
            p.to_upoly(0)?
        };
        let du = u.derivative();
        let q = &(&du * &du) - &UPoly::constant(rat(1, 1));
        if q.is_zero() {
            return Ok(Vec::new());
        }
        return Ok(isolate_upoly(&q, &rat(0, 1), &rat(1, 1))?
            .into_iter()
            .map(Num::from_algebraic)
            .collect());
    }
    let h = |t: f64| -> Result<Vec<f64>> {
        let d = derivative_at(g, t, 1)?;
        Ok(vec![d * d - 1.0])
    };
    Ok(sign_changes(&h, 1024)?
        .into_iter()
        .map(|x| Num::Rational(rational_from_f64(x)))
        .collect())
}

/// Cut where `|g'|` crosses 1; keep affine pieces where `|g'| <= 1` and
/// invert `g` where `|g'| >= 1`, so that `g` becomes affine there.
fn c1_step(g: &ChartExpr) -> Result<Vec<Step>> {
    let mut bounds = vec![Num::Rational(rat(0, 1))];
    bounds.extend(c1_points(g)?);
    bounds.push(Num::Rational(rat(1, 1)));
    let single = bounds.len() == 2;
    let mut out = Vec::new();
    for w in bounds.windows(2) {
        let (c, d) = (&w[0], &w[1]);
        let mid =
            crate::kernel::rational_to_f64(&rational_between(&as_algebraic(c), &as_algebraic(d)));
        let (ce, de) = (ChartExpr::num(c.clone()), ChartExpr::num(d.clone()));
        if derivative_at(g, mid, 1)?.abs() <= 1.0 {
            let prov = if single { vec![] } else { vec!["c1-split"] };
            out.push(Step {
                k: ChartExpr::blend(ChartExpr::var(0), de, ce),
                prov,
                target: None,
            });
        } else {
            let gc = g.substitute(from_ref(&ce))?;
            let gd = g.substitute(from_ref(&de))?;
            let s = ChartExpr::blend(ChartExpr::var(0), gd, gc);
            let fiber = ChartExpr::sub(g, &ChartExpr::var(1));
            let k = ChartExpr::branch(BranchNode {
                fiber,
                params: vec![s.clone()],
                lo: ce,
                hi: de,
                index: 0,
                count: Some(1),
            })?;
            out.push(Step {
                k,
                prov: vec!["c1-split", "inverse"],
                target: Some(s),
            });
        }
    }
    Ok(out)
}

/// Cut where `g^(s)` or `g^(s+1)` changes sign, orient each piece so that
/// `|g^(s)|` decreases, then substitute `x -> x^2`.
fn square_step(g: &ChartExpr, s: u32, limits: &Limits, notes: &mut Notes) -> Result<Vec<Step>> {
    let policy = NormPolicy::for_dim(1);
    let alpha = MultiIndex(vec![s]);
    if norm_estimate(from_ref(g), 1, &alpha, &policy)?.estimate <= 1.0 + limits.slack {
        return Ok(vec![Step {
            k: ChartExpr::var(0),
            prov: vec![],
            target: None,
        }]);
    }
    let h = |t: f64| -> Result<Vec<f64>> {
        let j = &jets_at(from_ref(g), &[t], s + 1)?[0];
        Ok(vec![j.derivative(&[s]), j.derivative(&[s + 1])])
    };
    let mut bounds = vec![rat(0, 1)];
    bounds.extend(sign_changes(&h, 512)?.into_iter().map(rational_from_f64));
    bounds.push(rat(1, 1));
    let mut out = Vec::new();
    for w in bounds.windows(2) {
        let (c, d) = (&w[0], &w[1]);
        let (cf, df) = (
            crate::kernel::rational_to_f64(c),
            crate::kernel::rational_to_f64(d),
        );
        let left = derivative_at(g, cf + 0.05 * (df - cf), s)?.abs();
        let right = derivative_at(g, cf + 0.95 * (df - cf), s)?.abs();
        let lam = if right > left {
            ChartExpr::affine(vec![c - d], d.clone())
        } else {
            ChartExpr::affine(vec![d - c], c.clone())
        };
        let piece = g.substitute(from_ref(&lam))?;
        if norm_estimate(from_ref(&piece), 1, &alpha, &policy)?.estimate <= 1.0 + limits.slack {
            out.push(Step {
                k: lam,
                prov: vec![],
                target: None,
            });
            continue;
        }
        notes.estimates.push(EstimateRecord { piece, order: s });
        let k = lam.substitute(&[ChartExpr::square(ChartExpr::var(0))])?;
        out.push(Step {
            k,
            prov: vec!["square-subst"],
            target: None,
        });
    }
    Ok(out)
}

fn push_prov(p: &mut Vec<String>, tag: &str) {
    if p.last().map(String::as_str) != Some(tag) {
        p.push(tag.to_string());
    }
}

fn settle(
    mut h: Piece1D,
    all: &[ChartExpr],
    s: u32,
    limits: &Limits,
    round: u32,
    out: &mut Vec<Piece1D>,
) -> Result<()> {
    let fs = all
        .iter()
        .map(|g| g.substitute(from_ref(&h.chart)))
        .collect::<Result<Vec<_>>>()?;
    let rep = norm_estimate(&fs, 1, &MultiIndex(vec![s]), &NormPolicy::for_dim(1))?;
    if rep.estimate <= 1.0 + limits.slack {
        h.norm = rep.estimate;
        h.converged = rep.converged;
        out.push(h);
        return Ok(());
    }
    if round >= limits.max_rounds {
        return Err(Error::NonConvergent(format!(
            "norm {} after {round} rescaling rounds",
            rep.estimate
        )));
    }
    let k = pieces_for(rep.estimate)?.max(2);
    for lam in unit_pieces(1, &[0], k, limits.max_charts)? {
        let mut p = h.provenance.clone();
        push_prov(&mut p, "rescale");
        let piece = Piece1D {
            chart: h.chart.substitute(lam.components())?,
            provenance: p,
            norm: f64::NAN,
            converged: true,
        };
        settle(piece, all, s, limits, round + 1, out)?;
        if out.len() > limits.max_charts {
            return Err(Error::LimitExceeded(format!(
                "more than {} charts",
                limits.max_charts
            )));
        }
    }
    Ok(())
}

/// Rescale every chart until all family members have `C^s` norm at most one.
fn normalize(
    charts: Vec<Piece1D>,
    all: &[ChartExpr],
    s: u32,
    limits: &Limits,
) -> Result<Vec<Piece1D>> {
    let mut out = Vec::new();
    for h in charts {
        settle(h, all, s, limits, 0, &mut out)?;
    }
    Ok(out)
}

/// Charts `h` of `(0,1)` covering it up to finitely many points, with
/// `‖h‖_r <= 1` and `‖g ∘ h‖_r <= 1` for every `g` in `funcs`. The functions
/// must take values in `[-1, 1]`.
pub fn resolve_family_1d(funcs: &[ChartExpr], r: u32, limits: &Limits) -> Result<Vec<Piece1D>> {
    resolve_family_noted(funcs, r, limits, &mut Notes::default())
}

pub(crate) fn resolve_family_noted(
    funcs: &[ChartExpr],
    r: u32,
    limits: &Limits,
    notes: &mut Notes,
) -> Result<Vec<Piece1D>> {
    let mut all = vec![ChartExpr::var(0)];
    all.extend(funcs.iter().cloned());
    let mut charts = vec![Piece1D::identity()];
    for s in 1..=r {
        for (j, g) in all.iter().enumerate() {
            if s > 1 {
                charts = normalize(charts, &all, s - 1, limits)?;
            }
            let mut next = Vec::new();
            for h in &charts {
                let gh = g.substitute(from_ref(&h.chart))?;
                let steps = if s == 1 {
                    c1_step(&gh)?
                } else {
                    square_step(&gh, s, limits, notes)?
                };
                for st in steps {
                    let chart = h.chart.substitute(from_ref(&st.k))?;
                    if let (Some(t), true) = (st.target, j > 0) {
                        notes.inverses.push((chart.clone(), j - 1, t));
                    }
                    let mut provenance = h.provenance.clone();
                    for tag in st.prov {
                        push_prov(&mut provenance, tag);
                    }
                    next.push(Piece1D {
                        chart,
                        provenance,
                        norm: f64::NAN,
                        converged: true,
                    });
                }
                if next.len() > limits.max_charts {
                    return Err(Error::LimitExceeded(format!(
                        "more than {} charts",
                        limits.max_charts
                    )));
                }
            }
            charts = next;
        }
        charts = normalize(charts, &all, s, limits)?;
    }
    Ok(charts)
}

fn check_interval(a: &Rational, b: &Rational) -> Result<()> {
    if !(a >= &rat(0, 1) && a < b && b <= &rat(1, 1)) {
        return Err(Error::InvalidInterval(format!(
            "({a}, {b}) is not inside (0, 1)"
        )));
    }
    Ok(())
}

/// `C^r` resolution of `f` on `(a, b)`: charts `φ` with `‖φ‖_r <= 1` and
/// `‖f ∘ φ‖_r <= 1` whose images cover `(a, b)` up to finitely many points.
pub fn resolve_interval_cr(
    f: &NashInput,
    a: &Rational,
    b: &Rational,
    r: u32,
    limits: &Limits,
) -> Result<Resolution> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected a function of one variable, got {}",
            f.dim()
        )));
    }
    if r == 0 {
        return Err(Error::Invalid("order r must be at least 1".into()));
    }
    check_interval(a, b)?;
    let fe = f.expr()?;
    let lam = ChartExpr::affine(vec![b - a], a.clone());
    let g = fe.substitute(from_ref(&lam))?;
    let sup = norm_estimate(
        from_ref(&g),
        1,
        &MultiIndex(vec![0]),
        &NormPolicy::for_dim(1),
    )?
    .estimate;
    if sup > 1.0 + limits.slack {
        return Err(Error::Invalid(format!(
            "function reaches {sup:.6} in absolute value; values must lie in [-1, 1]"
        )));
    }
    let mut notes = Notes::default();
    let pieces = resolve_family_noted(from_ref(&g), r, limits, &mut notes)?;
    let mut charts = Vec::new();
    for (i, p) in pieces.into_iter().enumerate() {
        charts.push(ChartRecord {
            chart: TriangularChart::new(1, vec![lam.substitute(from_ref(&p.chart))?])?,
            provenance: p.provenance,
            source: format!("piece {i}"),
            norm: Some(p.norm),
            converged: Some(p.converged),
        });
    }
    let inverses = notes
        .inverses
        .into_iter()
        .map(|(c, _, target)| {
            Ok(InverseRecord {
                chart: TriangularChart::new(1, vec![lam.substitute(from_ref(&c))?])?,
                function: fe.clone(),
                target,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Resolution {
        ambient: 1,
        alpha: MultiIndex(vec![r]),
        box_n: 1,
        density: 0.0,
        domain: Domain::Interval {
            lo: a.clone(),
            hi: b.clone(),
        },
        functions: vec![fe],
        charts,
        inverses,
        estimates: notes.estimates,
    })
}

/// The `C^1` case: affine pieces where `|f'| <= 1`, inverse charts elsewhere.
pub fn resolve_interval_c1(
    f: &NashInput,
    a: &Rational,
    b: &Rational,
    limits: &Limits,
) -> Result<Resolution> {
    resolve_interval_cr(f, a, b, 1, limits)
}
