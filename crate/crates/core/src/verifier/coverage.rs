use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::charts::norm::install;
use crate::charts::{Domain, Resolution, TriangularChart};
use crate::error::{Error, Result};
use crate::kernel::{rational_from_f64, rational_to_f64, Rational};
use crate::semialg::{decompose, slices_of, Presentation};

use super::Gate;

/// What the chart images should reach.
#[derive(Clone, Debug)]
pub enum CoverageTarget {
    Set(Presentation),
    Interval(Rational, Rational),
}

impl CoverageTarget {
    /// The target recorded in the resolution itself.
    pub fn of(res: &Resolution) -> Self {
        match &res.domain {
            Domain::Interval { lo, hi } => CoverageTarget::Interval(lo.clone(), hi.clone()),
            Domain::Set(p) => CoverageTarget::Set(p.clone()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CoverageTarget::Set(p) => p.vars(),
            CoverageTarget::Interval(..) => 1,
        }
    }
}

/// Sample points of the target inside the box `(1/n, 1 - 1/n)^d`: uniform
/// rejection samples with exact membership, plus exact samples of the
/// lower-dimensional slices.
pub fn target_samples(
    target: &CoverageTarget,
    n: u32,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match target {
        CoverageTarget::Interval(a, b) => {
            let (a, b) = (rational_to_f64(a), rational_to_f64(b));
            Ok((0..count)
                .map(|_| vec![a + (b - a) * rng.gen::<f64>()])
                .collect())
        }
        CoverageTarget::Set(p) => {
            let shrunk = p.with_box(n)?;
            let (lo, hi) = shrunk.interval();
            let (lo, hi) = (rational_to_f64(&lo), rational_to_f64(&hi));
            let d = p.vars();
            let mut out = Vec::new();
            let mut tries = 0;
            while out.len() < count && tries < 50 * count {
                tries += 1;
                let x: Vec<f64> = (0..d).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect();
                let q: Vec<Rational> = x.iter().map(|&v| rational_from_f64(v)).collect();
                if shrunk.contains(&q)? {
                    out.push(x);
                }
            }
            let decomp = decompose(&shrunk)?;
            for s in slices_of(&shrunk, &decomp)? {
                if s.dim() < d {
                    for pt in s.samples(20)? {
                        out.push(pt.iter().map(|a| a.to_f64()).collect());
                    }
                }
            }
            Ok(out)
        }
    }
}

const GRID: usize = 64;
const CANDIDATES: usize = 4;

struct Images {
    d: usize,
    cells: usize,
    /// Bucketed `(chart, parameter, image)` triples.
    buckets: Vec<Vec<(usize, Vec<f64>, Vec<f64>)>>,
}

impl Images {
    fn build(charts: &[&TriangularChart], d: usize) -> Result<Self> {
        let cells = GRID / 2;
        let mut buckets = vec![Vec::new(); cells.pow(d as u32)];
        let ts: Vec<f64> = (0..GRID).map(|i| (i as f64 + 0.5) / GRID as f64).collect();
        for (ci, c) in charts.iter().enumerate() {
            let params: Vec<Vec<f64>> = match c.l() {
                0 => vec![vec![]],
                1 => ts.iter().map(|&t| vec![t]).collect(),
                2 => ts
                    .iter()
                    .flat_map(|&a| ts.iter().map(move |&b| vec![a, b]))
                    .collect(),
                l => {
                    return Err(Error::Unsupported(format!(
                        "coverage for {l}-dimensional charts"
                    )))
                }
            };
            let imgs = install(|| {
                params
                    .par_iter()
                    .map(|t| c.eval_f64(t))
                    .collect::<Result<Vec<_>>>()
            })?;
            for (t, x) in params.into_iter().zip(imgs) {
                let b = Self::bucket_of(cells, &x);
                buckets[b].push((ci, t, x));
            }
        }
        Ok(Images { d, cells, buckets })
    }

    fn coord(cells: usize, v: f64) -> usize {
        ((v * cells as f64).floor().max(0.0) as usize).min(cells - 1)
    }

    fn bucket_of(cells: usize, x: &[f64]) -> usize {
        x.iter()
            .rev()
            .fold(0, |acc, &v| acc * cells + Self::coord(cells, v))
    }

    /// The closest grid images, searching rings of buckets outward.
    fn nearest(&self, p: &[f64]) -> Vec<(f64, usize, Vec<f64>)> {
        let h = 1.0 / self.cells as f64;
        let centre: Vec<i64> = p
            .iter()
            .map(|&v| Self::coord(self.cells, v) as i64)
            .collect();
        let mut best: Vec<(f64, usize, Vec<f64>)> = Vec::new();
        for ring in 0..=self.cells as i64 {
            let mut visit = |idx: &[i64]| {
                if idx.iter().any(|&k| k < 0 || k >= self.cells as i64) {
                    return;
                }
                let b = idx
                    .iter()
                    .rev()
                    .fold(0usize, |acc, &k| acc * self.cells + k as usize);
                for (ci, t, x) in &self.buckets[b] {
                    let dist = x
                        .iter()
                        .zip(p)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    best.push((dist, *ci, t.clone()));
                }
            };
            if self.d == 1 {
                for k in [centre[0] - ring, centre[0] + ring] {
                    visit(&[k]);
                    if ring == 0 {
                        break;
                    }
                }
            } else {
                for i in -ring..=ring {
                    for j in -ring..=ring {
                        if i.abs() == ring || j.abs() == ring {
                            visit(&[centre[0] + i, centre[1] + j]);
                        }
                    }
                }
            }
            best.sort_by(|a, b| a.0.total_cmp(&b.0));
            best.truncate(4 * CANDIDATES);
            // anything outside the searched rings is at least `ring * h` away
            if best.len() >= CANDIDATES && best[CANDIDATES - 1].0 <= ring as f64 * h {
                break;
            }
        }
        best.truncate(CANDIDATES);
        best
    }
}

/// Damped Gauss-Newton on `|φ(t) - p|` over the closed parameter cube.
fn refine(chart: &TriangularChart, p: &[f64], mut t: Vec<f64>) -> Result<f64> {
    let l = chart.l();
    let dist = |x: &[f64]| {
        x.iter()
            .zip(p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let eps = 1e-12;
    let mut best = dist(&chart.eval_f64(&t)?);
    if l == 0 {
        return Ok(best);
    }
    for _ in 0..40 {
        let jets = chart.jets::<f64>(&t, 1)?;
        let e: Vec<f64> = jets.iter().zip(p).map(|(j, b)| j.value() - b).collect();
        let jac: Vec<Vec<f64>> = jets
            .iter()
            .map(|j| {
                (0..l)
                    .map(|k| {
                        let mut b = vec![0; l];
                        b[k] = 1;
                        j.derivative(&b)
                    })
                    .collect()
            })
            .collect();
        let mut a = vec![vec![0.0; l]; l];
        let mut g = vec![0.0; l];
        for (row, ei) in jac.iter().zip(&e) {
            for i in 0..l {
                g[i] += row[i] * ei;
                for k in 0..l {
                    a[i][k] += row[i] * row[k];
                }
            }
        }
        let mu = 1e-12 * (a.iter().enumerate().map(|(i, r)| r[i]).sum::<f64>() + 1e-300);
        for (i, r) in a.iter_mut().enumerate() {
            r[i] += mu;
        }
        let step: Vec<f64> = if l == 1 {
            vec![-g[0] / a[0][0]]
        } else {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            vec![
                -(a[1][1] * g[0] - a[0][1] * g[1]) / det,
                -(a[0][0] * g[1] - a[1][0] * g[0]) / det,
            ]
        };
        if step.iter().any(|s| !s.is_finite()) {
            break;
        }
        let mut lam = 1.0;
        let mut moved = false;
        for _ in 0..20 {
            let cand: Vec<f64> = t
                .iter()
                .zip(&step)
                .map(|(x, s)| (x + lam * s).clamp(eps, 1.0 - eps))
                .collect();
            let dc = dist(&chart.eval_f64(&cand)?);
            if dc < best {
                best = dc;
                t = cand;
                moved = true;
                break;
            }
            lam *= 0.5;
        }
        if !moved || best < 1e-15 {
            break;
        }
    }
    Ok(best)
}

/// Every target sample lies within `density + tol` of the chart images.
/// Distances come from a 64^l parameter grid per chart, refined locally
/// around the nearest grid images.
pub fn check_coverage(
    res: &Resolution,
    target: &CoverageTarget,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<Gate> {
    let limit = res.density + tol;
    let mut g = Gate::new(
        "coverage",
        format!("{GRID}^l images per chart, {samples} samples"),
        tol,
    );
    if target.dim() != res.ambient {
        return Err(Error::DimensionMismatch(format!(
            "target in {} variables, charts in {}",
            target.dim(),
            res.ambient
        )));
    }
    let pts = target_samples(target, res.box_n, samples, seed)?;
    if res.charts.is_empty() {
        if !pts.is_empty() {
            g.observe(f64::INFINITY, limit);
            g.fail("no charts for a nonempty target".into());
        }
        return Ok(g);
    }
    let charts: Vec<&TriangularChart> = res.charts.iter().map(|c| &c.chart).collect();
    let images = Images::build(&charts, res.ambient)?;
    let dists = install(|| {
        pts.par_iter()
            .map(|p| {
                let near = images.nearest(p);
                let mut best = near.first().map_or(f64::INFINITY, |c| c.0);
                for (d0, ci, t) in near {
                    if best <= limit * 1e-3 {
                        break;
                    }
                    best = best.min(d0).min(refine(charts[ci], p, t)?);
                }
                Ok(best)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    for (p, d) in pts.iter().zip(dists) {
        g.checked += 1;
        g.observe(d, limit);
        if !(d <= limit) {
            g.fail(format!("sample {p:?} is {d:e} from the images"));
        }
    }
    Ok(g)
}
