//! Numerical checks of resolutions and decompositions, and the
//! coefficient-size experiment.

pub mod coverage;
pub mod experiment;
pub mod gates;

use serde::{Deserialize, Serialize};

use crate::charts::Resolution;
use crate::error::Result;

pub use coverage::{check_coverage, target_samples, CoverageTarget};
pub use experiment::{
    degree_robustness_experiment, experiment_input, squashed_polynomial, ExperimentConfig,
    ExperimentReport, ExperimentRow,
};
pub use gates::{
    check_estimate_eq1, check_inverse_records, check_inverses, check_membership_grid, check_norms,
    check_sign_invariance,
};

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    /// The extreme value that was compared against the tolerance.
    pub measured: f64,
    pub tolerance: f64,
    /// Number of points, charts or pieces examined.
    pub checked: usize,
    pub grid: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Gate {
    pub(crate) fn new(name: &str, grid: impl Into<String>, tolerance: f64) -> Self {
        Gate {
            name: name.into(),
            passed: true,
            measured: 0.0,
            tolerance,
            checked: 0,
            grid: grid.into(),
            notes: Vec::new(),
        }
    }

    /// Record `value`, which must not exceed `limit`.
    pub(crate) fn observe(&mut self, value: f64, limit: f64) {
        if value.is_finite() {
            self.measured = self.measured.max(value);
        }
        if !(value <= limit) {
            self.passed = false;
        }
    }

    pub(crate) fn fail(&mut self, note: String) {
        self.passed = false;
        if self.notes.len() < 20 {
            self.notes.push(note);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub gates: Vec<Gate>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub samples: usize,
    pub coverage_tol: f64,
    pub norm_tol: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 10_000,
            coverage_tol: 1e-4,
            norm_tol: 1e-6,
            seed: 7,
        }
    }
}

/// Norm, inverse and estimate gates, plus coverage when a target is given.
pub fn verify_resolution(
    res: &Resolution,
    target: Option<&CoverageTarget>,
    cfg: &VerifyConfig,
) -> Result<VerificationReport> {
    let mut gates = Vec::new();
    if let Some(t) = target {
        gates.push(check_coverage(
            res,
            t,
            cfg.samples,
            cfg.coverage_tol,
            cfg.seed,
        )?);
    }
    gates.push(check_norms(res, cfg.norm_tol)?);
    gates.push(check_inverses(res, 1e-10)?);
    if !res.estimates.is_empty() {
        let mut eq1 = Gate::new("estimate-eq1", "1000 points per piece", 1e-9);
        let mut sq = Gate::new("estimate-square", "1000 points per piece", 1e-6);
        for e in &res.estimates {
            let (a, b) = check_estimate_eq1(&e.piece, e.order)?;
            merge_into(&mut eq1, a);
            merge_into(&mut sq, b);
        }
        gates.push(eq1);
        gates.push(sq);
    }
    Ok(VerificationReport {
        seed: cfg.seed,
        gates,
    })
}

fn merge_into(acc: &mut Gate, g: Gate) {
    acc.passed &= g.passed;
    acc.measured = acc.measured.max(g.measured);
    acc.checked += g.checked;
    for n in g.notes {
        if acc.notes.len() < 20 {
            acc.notes.push(n);
        }
    }
}
