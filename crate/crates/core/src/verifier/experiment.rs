use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::{resolve_interval_cr, Limits, NashInput};
use crate::error::{Error, Result};
use crate::kernel::{rat, rational_from_f64, MultiPoly, Rational};

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub degree: u32,
    pub order: u32,
    pub runs: usize,
    /// Largest coefficient magnitude in each bucket.
    pub buckets: Vec<f64>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.buckets.is_empty() {
            return Err(Error::Invalid(
                "at least one magnitude bucket is required".into(),
            ));
        }
        if let Some(b) = self.buckets.iter().find(|b| !(b.is_finite() && **b >= 1.0)) {
            return Err(Error::Invalid(format!(
                "bucket {b} must be a finite magnitude >= 1"
            )));
        }
        if self.order == 0 || self.runs == 0 {
            return Err(Error::Invalid("order and runs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRow {
    pub seed: u64,
    pub degree: u32,
    pub order: u32,
    pub bucket: f64,
    pub run: usize,
    /// `None` when the engine failed on this input.
    pub n: Option<usize>,
    pub max_chart_degree: Option<u32>,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ExperimentRow>,
    /// `(bucket, max N)` in bucket order.
    pub max_n: Vec<(f64, usize)>,
    pub failures: usize,
    /// Equal maximum chart counts in every bucket and no engine failures.
    pub passed: bool,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("seed,degree,order,bucket,run,N,max_chart_degree,wall_ms\n");
        for r in &self.rows {
            let n = r.n.map_or(String::new(), |v| v.to_string());
            let dg = r.max_chart_degree.map_or(String::new(), |v| v.to_string());
            let _ = writeln!(
                s,
                "{},{},{},{:e},{},{},{},{:.3}",
                r.seed, r.degree, r.order, r.bucket, r.run, n, dg, r.wall_ms
            );
        }
        s
    }
}

/// `(1 + p / (B (1 + 1/10))) / 2` with `B` the sum of the absolute
/// coefficients, so the values lie strictly inside `(0, 1)` on `[0, 1]`.
pub fn squashed_polynomial(coeffs: &[Rational]) -> MultiPoly {
    let b: Rational = coeffs
        .iter()
        .map(|c| {
            if c < &rat(0, 1) {
                -c.clone()
            } else {
                c.clone()
            }
        })
        .sum();
    let half = MultiPoly::constant(1, rat(1, 2));
    if b == rat(0, 1) {
        return half;
    }
    let scale = rat(1, 2) / (b * rat(11, 10));
    let x = MultiPoly::var(1, 0);
    let mut p = MultiPoly::zero(1);
    for (k, c) in coeffs.iter().enumerate() {
        p = &p + &x.pow(k as u32).scale(&(c * &scale));
    }
    &p + &half
}

fn draw(degree: u32, bucket: f64, rng: &mut ChaCha8Rng) -> Vec<Rational> {
    (0..=degree)
        .map(|k| {
            let mut u: f64 = rng.gen_range(-1.0..1.0);
            if k == degree && u.abs() < 1e-3 {
                u = 1e-3f64.copysign(u);
            }
            let w: f64 = rng.gen();
            rational_from_f64(u * bucket.powf(w))
        })
        .collect()
}

fn run_seed(seed: u64, bucket_index: usize, run: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((bucket_index as u64) << 32) ^ run as u64
}

/// The squashed input used for `run` in bucket number `bucket_index`.
pub fn experiment_input(cfg: &ExperimentConfig, bucket_index: usize, run: usize) -> MultiPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed(cfg.seed, bucket_index, run));
    squashed_polynomial(&draw(cfg.degree, cfg.buckets[bucket_index], &mut rng))
}

/// Random degree-`δ` polynomials with coefficients `u * b^w` (`u` uniform
/// in `[-1, 1]`, `w` uniform in `[0, 1]`) for each bucket `b`, squashed into
/// `(0, 1)` and resolved on the unit interval at order `r`.
pub fn degree_robustness_experiment(
    cfg: &ExperimentConfig,
    limits: &Limits,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (bi, &bucket) in cfg.buckets.iter().enumerate() {
        for run in 0..cfg.runs {
            let f = experiment_input(cfg, bi, run);
            let t = Instant::now();
            let out = resolve_interval_cr(
                &NashInput::Poly(f),
                &rat(0, 1),
                &rat(1, 1),
                cfg.order,
                limits,
            );
            let wall_ms = t.elapsed().as_secs_f64() * 1e3;
            let (n, max_chart_degree, error) = match out {
                Ok(res) => (Some(res.count()), Some(res.max_degree()), None),
                Err(e) => (None, None, Some(e.to_string())),
            };
            rows.push(ExperimentRow {
                seed: cfg.seed,
                degree: cfg.degree,
                order: cfg.order,
                bucket,
                run,
                n,
                max_chart_degree,
                wall_ms,
                error,
            });
        }
    }
    let max_n: Vec<(f64, usize)> = cfg
        .buckets
        .iter()
        .map(|&b| {
            (
                b,
                rows.iter()
                    .filter(|r| r.bucket == b)
                    .filter_map(|r| r.n)
                    .max()
                    .unwrap_or(0),
            )
        })
        .collect();
    let failures = rows.iter().filter(|r| r.n.is_none()).count();
    let passed = failures == 0 && max_n.windows(2).all(|w| w[0].1 == w[1].1);
    Ok(ExperimentReport {
        config: cfg.clone(),
        rows,
        max_n,
        failures,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squash_stays_inside_the_unit_interval() {
        let f = squashed_polynomial(&[rat(-1000, 1), rat(3, 1), rat(5000, 1)]);
        for i in 0..=100 {
            let v = f.eval_f64(&[i as f64 / 100.0]);
            assert!(v > 0.0 && v < 1.0);
        }
    }

    #[test]
    fn affine_inputs_need_one_chart() {
        let cfg = ExperimentConfig {
            degree: 1,
            order: 2,
            runs: 5,
            buckets: vec![1.0, 1e3, 1e6],
            seed: 3,
        };
        let rep = degree_robustness_experiment(&cfg, &Limits::default()).unwrap();
        assert!(rep.passed);
        assert!(rep.max_n.iter().all(|&(_, n)| n == 1));
        let csv = rep.to_csv();
        assert!(csv.starts_with("seed,degree,order,bucket,run,N,max_chart_degree,wall_ms\n"));
        assert!(csv.contains(",1e6,"));
    }
}
