//! Jet evaluation of chart expressions.

use std::collections::HashMap;

use super::expr::{BranchNode, ChartExpr, Node, Num};
use crate::error::{Error, Result};
use crate::kernel::jet::{poly_on_jets, Scalar};
use crate::kernel::{rationalize, Jet, Rational};

/// Scalars that chart expressions can be evaluated over.
pub trait EvalScalar: Scalar {
    const EXACT: bool;
    fn from_num(n: &Num) -> Result<Self>;
    /// Turn a floating-point root into a scalar; exact scalars get a
    /// candidate that the caller must certify.
    fn lift_root(x: f64) -> Result<Self>;
}

impl EvalScalar for f64 {
    const EXACT: bool = false;

    fn from_num(n: &Num) -> Result<Self> {
        Ok(n.to_f64())
    }

    fn lift_root(x: f64) -> Result<Self> {
        Ok(x)
    }
}

impl EvalScalar for Rational {
    const EXACT: bool = true;

    fn from_num(n: &Num) -> Result<Self> {
        n.as_rational().cloned().ok_or(Error::NotExact)
    }

    fn lift_root(x: f64) -> Result<Self> {
        rationalize(x, 1e-11, 1_000_000).ok_or(Error::NotExact)
    }
}

/// Evaluates expressions of one context at fixed input jets, sharing
/// common subexpressions.
pub struct Evaluator<'a, S: EvalScalar> {
    inputs: &'a [Jet<S>],
    m: usize,
    order: u32,
    memo: HashMap<*const Node, Jet<S>>,
}

impl<'a, S: EvalScalar> Evaluator<'a, S> {
    /// `m` and `order` describe the jets; they matter when `inputs` is empty.
    pub fn new(inputs: &'a [Jet<S>], m: usize, order: u32) -> Self {
        Evaluator {
            inputs,
            m,
            order,
            memo: HashMap::new(),
        }
    }

    pub fn eval(&mut self, e: &ChartExpr) -> Result<Jet<S>> {
        let key = e.node() as *const Node;
        if let Some(j) = self.memo.get(&key) {
            return Ok(j.clone());
        }
        let (m, r) = (self.m, self.order);
        let out = match e.node() {
            Node::Var(i) => self.inputs.get(*i).cloned().ok_or(Error::InvalidVariable {
                index: *i,
                nvars: self.inputs.len(),
            })?,
            Node::Const(n) => Jet::constant(m, r, S::from_num(n)?),
            Node::Affine { coeffs, offset } => {
                let mut acc = Jet::constant(m, r, S::from_rational(offset));
                for (i, c) in coeffs.iter().enumerate() {
                    if c != &Rational::from_integer(0.into()) {
                        let x = self.inputs.get(i).ok_or(Error::InvalidVariable {
                            index: i,
                            nvars: self.inputs.len(),
                        })?;
                        acc = acc.add(&x.scale(&S::from_rational(c)));
                    }
                }
                acc
            }
            Node::Poly { poly, args } => {
                if args.is_empty() {
                    Jet::constant(m, r, S::from_rational(&poly.constant_term()))
                } else {
                    let a = args
                        .iter()
                        .map(|x| self.eval(x))
                        .collect::<Result<Vec<_>>>()?;
                    poly_on_jets(poly, &a)
                }
            }
            Node::Square(a) => self.eval(a)?.square(),
            Node::Blend { t, u, v } => {
                let (t, u, v) = (self.eval(t)?, self.eval(u)?, self.eval(v)?);
                v.add(&t.mul(&u.sub(&v)))
            }
            Node::Branch(b) => self.branch(b)?,
            Node::Compose { inner, args } => {
                let a = args
                    .iter()
                    .map(|x| self.eval(x))
                    .collect::<Result<Vec<_>>>()?;
                Evaluator::new(&a, m, r).eval(inner)?
            }
            Node::Deriv { inner, beta } => self.deriv(inner, beta)?,
        };
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    fn deriv(&mut self, inner: &ChartExpr, beta: &[u32]) -> Result<Jet<S>> {
        let k = self.inputs.len();
        if beta.len() > k && beta[k..].iter().any(|&b| b > 0) {
            return Err(Error::LengthMismatch(beta.len(), k));
        }
        let mut b = beta.to_vec();
        b.resize(k, 0);
        let w: u32 = b.iter().sum();
        let point: Vec<S> = self.inputs.iter().map(|j| j.value().clone()).collect();
        let ids = Jet::identity(&point, self.order + w);
        let full = Evaluator::new(&ids, k, self.order + w).eval(inner)?;
        let d = full.differentiate(&b);
        if k == 0 {
            return Ok(Jet::constant(self.m, self.order, d.value().clone()));
        }
        Ok(d.compose(self.inputs))
    }

    fn branch(&mut self, b: &BranchNode) -> Result<Jet<S>> {
        let (m, r) = (self.m, self.order);
        let params = b
            .params
            .iter()
            .map(|x| self.eval(x))
            .collect::<Result<Vec<_>>>()?;
        let lo = self.eval(&b.lo)?.value().to_f64();
        let hi = self.eval(&b.hi)?.value().to_f64();
        let pv: Vec<f64> = params.iter().map(|j| j.value().to_f64()).collect();
        let z0 = root_f64(b, &pv, lo, hi)?;
        let zs = S::lift_root(z0)?;
        let k = params.len();
        let mut point = vec![zs.clone()];
        point.extend(params.iter().map(|j| j.value().clone()));
        let first = Evaluator::new(&Jet::identity(&point, 1), k + 1, 1).eval(&b.fiber)?;
        if S::EXACT && !first.value().is_zero_value() {
            return Err(Error::NotExact);
        }
        let mut e0 = vec![0u32; k + 1];
        e0[0] = 1;
        let fz = first.derivative(&e0);
        if fz.is_zero_value() {
            return Err(Error::Singular(format!(
                "branch fiber is singular at z = {z0}"
            )));
        }
        let inv = S::one().over(&fz);
        let mut z = Jet::constant(m, r, zs);
        for _ in 0..r {
            let mut args = vec![z.clone()];
            args.extend(params.iter().cloned());
            let f = Evaluator::new(&args, m, r).eval(&b.fiber)?;
            z = z.sub(&f.scale(&inv));
        }
        Ok(z)
    }
}

/// Jets of several expressions at input jets, with shared subexpressions.
pub fn eval_jets<S: EvalScalar>(
    es: &[ChartExpr],
    inputs: &[Jet<S>],
    m: usize,
    order: u32,
) -> Result<Vec<Jet<S>>> {
    let mut ev = Evaluator::new(inputs, m, order);
    es.iter().map(|e| ev.eval(e)).collect()
}

/// Jets of order `order` at `point` in the expressions' own variables.
pub fn jets_at<S: EvalScalar>(es: &[ChartExpr], point: &[S], order: u32) -> Result<Vec<Jet<S>>> {
    let ids = Jet::identity(point, order);
    eval_jets(es, &ids, point.len(), order)
}

pub fn eval_f64(e: &ChartExpr, x: &[f64]) -> Result<f64> {
    Ok(*jets_at(std::slice::from_ref(e), x, 0)?[0].value())
}

pub fn eval_many_f64(es: &[ChartExpr], x: &[f64]) -> Result<Vec<f64>> {
    Ok(jets_at(es, x, 0)?.iter().map(|j| *j.value()).collect())
}

/// Floating-point location of the branch root.
fn root_f64(b: &BranchNode, params: &[f64], lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::OutsideDomain(format!(
            "empty branch interval ({lo}, {hi})"
        )));
    }
    match b.fiber.as_poly() {
        Some(p) => {
            // Collapse to a univariate polynomial in z.
            let deg = p.degree_in(0) as usize;
            let mut c = vec![0.0; deg + 1];
            for (e, q) in p.terms() {
                let mut v = crate::kernel::rational_to_f64(q);
                for (i, &k) in e.iter().enumerate().skip(1) {
                    let x = *params.get(i - 1).ok_or(Error::InvalidVariable {
                        index: i,
                        nvars: params.len() + 1,
                    })?;
                    v *= x.powi(k as i32);
                }
                c[e.first().copied().unwrap_or(0) as usize] += v;
            }
            let f = |z: f64| -> Result<f64> { Ok(c.iter().rev().fold(0.0, |acc, a| acc * z + a)) };
            locate_root(&f, lo, hi, b.index, b.count)
        }
        None => {
            let f = |z: f64| -> Result<f64> {
                let mut x = vec![z];
                x.extend_from_slice(params);
                eval_f64(&b.fiber, &x)
            };
            locate_root(&f, lo, hi, b.index, b.count)
        }
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// The `index`-th root in `(lo, hi)` of a continuous function.
pub fn locate_root(
    f: &dyn Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    index: usize,
    count: Option<usize>,
) -> Result<f64> {
    if count == Some(1) && index == 0 {
        let (fa, fb) = (f(lo)?, f(hi)?);
        if fa == 0.0 {
            return Ok(lo);
        }
        if fb == 0.0 {
            return Ok(hi);
        }
        if sign(fa) != sign(fb) {
            return refine_root(f, lo, hi, fa, fb);
        }
    }
    let mut found = 0;
    for n in [64usize, 1024] {
        let roots = scan_roots(f, lo, hi, n)?;
        found = roots.len();
        let ok = match count {
            Some(c) => roots.len() == c,
            None => roots.len() > index,
        };
        if ok {
            return Ok(roots[index]);
        }
    }
    Err(Error::NonConvergent(format!(
        "found {found} roots in ({lo}, {hi}), wanted index {index} of {}",
        count.map_or("?".into(), |c| c.to_string())
    )))
}

fn scan_roots(f: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    let zs: Vec<f64> = (0..=n)
        .map(|j| lo + (hi - lo) * j as f64 / n as f64)
        .collect();
    let vs = zs.iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    for j in 0..n {
        if j > 0 && vs[j] == 0.0 {
            roots.push(zs[j]);
            continue;
        }
        let (a, b) = (sign(vs[j]), sign(vs[j + 1]));
        if a != 0 && b != 0 && a != b {
            roots.push(refine_root(f, zs[j], zs[j + 1], vs[j], vs[j + 1])?);
        }
    }
    Ok(roots)
}

/// Illinois iteration on a sign-changing bracket.
pub(crate) fn refine_root(
    f: &dyn Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
) -> Result<f64> {
    for it in 0..300 {
        let mut c = b - fb * (b - a) / (fb - fa);
        let (l, h) = (a.min(b), a.max(b));
        if !(c > l && c < h) || it > 80 {
            c = 0.5 * (a + b);
        }
        if c <= l || c >= h {
            break;
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if sign(fc) != sign(fb) {
            a = b;
            fa = fb;
        } else {
            fa *= 0.5;
        }
        b = c;
        fb = fc;
        if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{int, parse_poly, rat};

    fn sqrt_branch() -> ChartExpr {
        ChartExpr::branch(BranchNode {
            fiber: ChartExpr::from_poly(&parse_poly("x1^2 - x2", 2).unwrap()),
            params: vec![ChartExpr::var(0)],
            lo: ChartExpr::constant(int(0)),
            hi: ChartExpr::constant(int(1)),
            index: 0,
            count: Some(1),
        })
        .unwrap()
    }

    #[test]
    fn branch_jets_exact_and_float() {
        let b = sqrt_branch();
        let j = &jets_at(&[b.clone()], &[rat(1, 4)], 3).unwrap()[0];
        assert_eq!(j.derivative(&[0]), rat(1, 2));
        assert_eq!(j.derivative(&[1]), int(1));
        assert_eq!(j.derivative(&[2]), int(-2));
        assert_eq!(j.derivative(&[3]), int(12));
        let jf = &jets_at(&[b], &[0.3f64], 2).unwrap()[0];
        assert!((jf.derivative(&[2]) + 0.25 * 0.3f64.powf(-1.5)).abs() < 1e-10);
    }

    #[test]
    fn irrational_branch_is_not_exact() {
        let b = sqrt_branch();
        assert!(matches!(
            jets_at(&[b], &[rat(1, 2)], 1),
            Err(Error::NotExact)
        ));
    }

    #[test]
    fn deriv_node_matches_closed_form() {
        let d = ChartExpr::deriv(sqrt_branch(), vec![1]);
        let j = &jets_at(&[d], &[0.25f64], 1).unwrap()[0];
        assert!((j.value() - 1.0).abs() < 1e-12);
        assert!((j.derivative(&[1]) + 2.0).abs() < 1e-9);
    }

    #[test]
    fn compose_through_deriv() {
        // (sqrt)'(y^2) = 1/(2y), with derivative -1/(2y^2)
        let d = ChartExpr::deriv(sqrt_branch(), vec![1]);
        let c = ChartExpr::compose(&d, &[ChartExpr::square(ChartExpr::var(0))]).unwrap();
        let j = &jets_at(&[c], &[0.5f64], 1).unwrap()[0];
        assert!((j.value() - 1.0).abs() < 1e-12);
        assert!((j.derivative(&[1]) + 2.0).abs() < 1e-9);
    }

    #[test]
    fn scan_finds_ordered_roots() {
        let f = |z: f64| -> Result<f64> { Ok((z - 0.2) * (z - 0.5) * (z - 0.7)) };
        assert!((locate_root(&f, 0.0, 1.0, 1, Some(3)).unwrap() - 0.5).abs() < 1e-14);
        assert!(locate_root(&f, 0.0, 1.0, 0, Some(2)).is_err());
    }
}
