use crate::error::{Error, Result};
use crate::kernel::jet::{poly_on_jets, Jet, Scalar};
use crate::kernel::{MultiPoly, Rational};

use super::cad::NashBranch;

/// Value and derivatives `ζ, ζ', ..., ζ^(order)` of a branch at a base point.
#[derive(Clone, Debug)]
pub struct BranchJet {
    pub derivs: Vec<f64>,
    /// Exact derivatives, present when the branch value is rational.
    pub exact: Option<Vec<Rational>>,
}

/// Series solution `Z(t)` of `P(Z(t), y + t) = 0` with `Z(0) = z0`, by
/// chord Newton steps; each step fixes one more coefficient.
fn implicit_series<S: Scalar>(p: &MultiPoly, z0: S, y: S, order: u32) -> Result<Jet<S>> {
    let px = p.derivative(0)?;
    let d = poly_on_jets(
        &px,
        &[
            Jet::constant(1, 0, z0.clone()),
            Jet::constant(1, 0, y.clone()),
        ],
    )
    .value()
    .clone();
    if d.is_zero_value() || d.to_f64().abs() < 1e-300 {
        return Err(Error::Singular(
            "fiber derivative vanishes on the branch".into(),
        ));
    }
    let yj = Jet::variable(1, order, 0, y);
    let mut z = Jet::constant(1, order, z0);
    for _ in 0..=order + 1 {
        let r = poly_on_jets(p, &[z.clone(), yj.clone()]);
        z = z.sub(&r.scale(&S::one().over(&d)));
    }
    Ok(z)
}

fn derivs_of<S: Scalar>(z: &Jet<S>, order: u32) -> Vec<S> {
    (0..=order).map(|k| z.derivative(&[k])).collect()
}

/// Jet of a branch by implicit differentiation of `P(ζ(y), y) = 0`.
pub fn branch_eval(branch: &NashBranch, y: &Rational, order: u32) -> Result<BranchJet> {
    let root = branch.root_at(y)?;
    let ux = branch.fiber.derivative(0)?.substitute(1, y)?.to_upoly(0)?;
    if root.sign_of(&ux) == 0 {
        return Err(Error::Singular(format!(
            "branch of {} is singular at x2 = {y}",
            branch.fiber
        )));
    }
    if let Some(z0) = root.as_rational() {
        let z = implicit_series(&branch.fiber, z0.clone(), y.clone(), order)?;
        let exact = derivs_of(&z, order);
        return Ok(BranchJet {
            derivs: exact.iter().map(Scalar::to_f64).collect(),
            exact: Some(exact),
        });
    }
    let z = implicit_series(
        &branch.fiber,
        root.to_f64(),
        crate::kernel::rational_to_f64(y),
        order,
    )?;
    Ok(BranchJet {
        derivs: derivs_of(&z, order),
        exact: None,
    })
}
