//! Truncated multivariate Taylor series ("jets") over `f64` or exact rationals.
//!
//! A jet of order `r` in `m` variables stores the Taylor coefficients
//! `f^(β)(p) / β!` for all `|β| <= r`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};

use super::{rational_to_f64, MultiPoly, Rational};

/// Field operations needed by jet arithmetic.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn over(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    fn is_zero_value(&self) -> bool;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn is_zero_value(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(n: i64) -> Self {
        Rational::from_integer(n.into())
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
}

/// Monomial layout shared by all jets with the same `(nvars, order)`.
#[derive(Debug)]
pub struct JetShape {
    nvars: usize,
    order: u32,
    monos: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    /// `(i, j, k)` with `monos[i] + monos[j] = monos[k]`.
    mul_table: Vec<(usize, usize, usize)>,
}

impl JetShape {
    pub fn get(nvars: usize, order: u32) -> Arc<JetShape> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<JetShape>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetShape::build(nvars, order)))
            .clone()
    }

    fn build(nvars: usize, order: u32) -> JetShape {
        let mut monos = Vec::new();
        for total in 0..=order {
            let mut cur = vec![0u32; nvars];
            push_compositions(&mut monos, &mut cur, 0, total);
        }
        let index: HashMap<Vec<u32>, usize> = monos
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        let mut mul_table = Vec::new();
        for (i, a) in monos.iter().enumerate() {
            for (j, b) in monos.iter().enumerate() {
                let s: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(&k) = index.get(&s) {
                    mul_table.push((i, j, k));
                }
            }
        }
        JetShape {
            nvars,
            order,
            monos,
            index,
            mul_table,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monos
    }

    pub fn index_of(&self, beta: &[u32]) -> Option<usize> {
        self.index.get(beta).copied()
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }
}

fn push_compositions(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if cur.is_empty() {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == cur.len() - 1 {
        cur[pos] = left;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k;
        push_compositions(out, cur, pos + 1, left - k);
    }
    cur[pos] = 0;
}

/// `β! = Π β_i!`.
pub fn multi_factorial(beta: &[u32]) -> u64 {
    beta.iter()
        .map(|&b| (1..=b as u64).product::<u64>())
        .product()
}

#[derive(Clone)]
pub struct Jet<S: Scalar> {
    shape: Arc<JetShape>,
    c: Vec<S>,
}

impl<S: Scalar> fmt::Debug for Jet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.shape.nvars)
            .field("order", &self.shape.order)
            .field("c", &self.c)
            .finish()
    }
}

impl<S: Scalar> Jet<S> {
    pub fn constant(nvars: usize, order: u32, v: S) -> Self {
        let shape = JetShape::get(nvars, order);
        let mut c = vec![S::zero(); shape.len()];
        c[0] = v;
        Jet { shape, c }
    }

    /// The coordinate function `x_i` expanded at `x_i = v`.
    pub fn variable(nvars: usize, order: u32, i: usize, v: S) -> Self {
        let mut j = Self::constant(nvars, order, v);
        if order >= 1 {
            let mut e = vec![0; nvars];
            e[i] = 1;
            let k = j.shape.index_of(&e).expect("degree-one monomial");
            j.c[k] = S::one();
        }
        j
    }

    /// Identity jets of all coordinates at `point`.
    pub fn identity(point: &[S], order: u32) -> Vec<Self> {
        (0..point.len())
            .map(|i| Self::variable(point.len(), order, i, point[i].clone()))
            .collect()
    }

    pub fn from_coeffs(nvars: usize, order: u32, c: Vec<S>) -> Self {
        let shape = JetShape::get(nvars, order);
        assert_eq!(c.len(), shape.len());
        Jet { shape, c }
    }

    pub fn nvars(&self) -> usize {
        self.shape.nvars
    }

    pub fn order(&self) -> u32 {
        self.shape.order
    }

    pub fn shape(&self) -> &Arc<JetShape> {
        &self.shape
    }

    pub fn value(&self) -> &S {
        &self.c[0]
    }

    pub fn coeffs(&self) -> &[S] {
        &self.c
    }

    /// Taylor coefficient of `x^β`; zero beyond the order.
    pub fn coeff(&self, beta: &[u32]) -> S {
        self.shape
            .index_of(beta)
            .map(|k| self.c[k].clone())
            .unwrap_or_else(S::zero)
    }

    /// Partial derivative `D^β f` at the expansion point.
    pub fn derivative(&self, beta: &[u32]) -> S {
        self.coeff(beta)
            .times(&S::from_i64(multi_factorial(beta) as i64))
    }

    fn zip(&self, o: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        assert!(Arc::ptr_eq(&self.shape, &o.shape), "jet shapes differ");
        Jet {
            shape: self.shape.clone(),
            c: self.c.iter().zip(&o.c).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.plus(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.minus(b))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert!(Arc::ptr_eq(&self.shape, &o.shape), "jet shapes differ");
        let mut c = vec![S::zero(); self.c.len()];
        for &(i, j, k) in &self.shape.mul_table {
            if self.c[i].is_zero_value() || o.c[j].is_zero_value() {
                continue;
            }
            c[k] = c[k].plus(&self.c[i].times(&o.c[j]));
        }
        Jet {
            shape: self.shape.clone(),
            c,
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Jet {
            shape: self.shape.clone(),
            c: self.c.iter().map(|a| a.times(s)).collect(),
        }
    }

    pub fn add_scalar(&self, s: &S) -> Self {
        let mut out = self.clone();
        out.c[0] = out.c[0].plus(s);
        out
    }

    pub fn neg(&self) -> Self {
        Jet {
            shape: self.shape.clone(),
            c: self.c.iter().map(S::negate).collect(),
        }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Reciprocal by the geometric series in the non-constant part.
    pub fn recip(&self) -> Self {
        let v = self.c[0].clone();
        let inv = S::one().over(&v);
        // 1/(v + h) = (1/v) Σ (-h/v)^k
        let mut h = self.clone();
        h.c[0] = S::zero();
        let q = h.scale(&inv.negate());
        let mut term = Self::constant(self.nvars(), self.order(), S::one());
        let mut acc = term.clone();
        for _ in 0..self.order() {
            term = term.mul(&q);
            acc = acc.add(&term);
        }
        acc.scale(&inv)
    }

    /// Jet of `D^β f`, of order `r - |β|`.
    pub fn differentiate(&self, beta: &[u32]) -> Self {
        let b: u32 = beta.iter().sum();
        let order = self.order().saturating_sub(b);
        let shape = JetShape::get(self.nvars(), order);
        let c = shape
            .monos
            .iter()
            .map(|g| {
                let gb: Vec<u32> = g.iter().zip(beta).map(|(x, y)| x + y).collect();
                let mut f = 1u64;
                for (x, y) in g.iter().zip(beta) {
                    for t in x + 1..=x + y {
                        f *= t as u64;
                    }
                }
                self.coeff(&gb).times(&S::from_i64(f as i64))
            })
            .collect();
        Jet { shape, c }
    }

    /// Keep only terms up to `order`.
    pub fn truncate(&self, order: u32) -> Self {
        let shape = JetShape::get(self.nvars(), order.min(self.order()));
        let c = shape.monos.iter().map(|m| self.coeff(m)).collect();
        Jet { shape, c }
    }

    /// Substitute `x_i = p_i + (a_i - a_i(0))` where `p` is this jet's
    /// expansion point and `a_i` are jets in other variables.
    pub fn compose(&self, args: &[Jet<S>]) -> Jet<S> {
        assert_eq!(args.len(), self.nvars());
        let (m, r) = args
            .first()
            .map(|a| (a.nvars(), a.order()))
            .unwrap_or((0, 0));
        let deltas: Vec<Jet<S>> = args
            .iter()
            .map(|a| {
                let mut d = a.clone();
                d.c[0] = S::zero();
                d
            })
            .collect();
        let mut powers: Vec<Vec<Jet<S>>> = deltas
            .iter()
            .map(|d| vec![Jet::constant(m, r, S::one()), d.clone()])
            .collect();
        let mut acc = Jet::constant(m, r, S::zero());
        for (k, beta) in self.shape.monos.iter().enumerate() {
            if self.c[k].is_zero_value() {
                continue;
            }
            let deg: u32 = beta.iter().sum();
            if deg > r {
                continue;
            }
            let mut t = Jet::constant(m, r, self.c[k].clone());
            for (i, &e) in beta.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&deltas[i]);
                    powers[i].push(next);
                }
                if e > 0 {
                    t = t.mul(&powers[i][e as usize]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Jet<T> {
        Jet {
            shape: self.shape.clone(),
            c: self.c.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Jet<f64> {
        self.map(|s| s.to_f64())
    }
}

/// Evaluate a polynomial at jet arguments.
pub fn poly_on_jets<S: Scalar>(p: &MultiPoly, args: &[Jet<S>]) -> Jet<S> {
    assert_eq!(args.len(), p.nvars());
    let (m, r) = args
        .first()
        .map(|a| (a.nvars(), a.order()))
        .unwrap_or((0, 0));
    let mut powers: Vec<Vec<Jet<S>>> = args
        .iter()
        .map(|a| vec![Jet::constant(m, r, S::one()), a.clone()])
        .collect();
    let mut acc = Jet::constant(m, r, S::zero());
    for (e, c) in p.terms() {
        let mut t = Jet::constant(m, r, S::from_rational(c));
        for (i, &k) in e.iter().enumerate() {
            while powers[i].len() <= k as usize {
                let next = powers[i].last().unwrap().mul(&args[i]);
                powers[i].push(next);
            }
            if k > 0 {
                t = t.mul(&powers[i][k as usize]);
            }
        }
        acc = acc.add(&t);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{parse_poly, rat};

    #[test]
    fn shape_sizes() {
        assert_eq!(JetShape::get(2, 3).len(), 10);
        assert_eq!(JetShape::get(1, 4).len(), 5);
        assert_eq!(JetShape::get(0, 4).len(), 1);
    }

    #[test]
    fn polynomial_jets_match_derivatives() {
        let p = parse_poly("x1^3*x2 + 2*x2^2", 2).unwrap();
        let pt = [rat(1, 2), rat(3, 1)];
        let j = poly_on_jets(&p, &Jet::identity(&pt, 4));
        assert_eq!(j.value(), &p.eval(&pt).unwrap());
        // d/dx1 = 3 x1^2 x2, d2/dx1dx2 = 3 x1^2, d3/dx1^3 = 6 x2
        assert_eq!(j.derivative(&[1, 0]), rat(9, 4));
        assert_eq!(j.derivative(&[2, 1]), rat(3, 1));
        assert_eq!(j.derivative(&[3, 0]), rat(18, 1));
        assert_eq!(j.derivative(&[0, 2]), rat(4, 1));
    }

    #[test]
    fn recip_and_compose() {
        let x = Jet::<f64>::variable(1, 5, 0, 0.5);
        let r = x.recip();
        // d^k/dx^k (1/x) = (-1)^k k! / x^(k+1)
        assert!((r.derivative(&[3]) - (-6.0 / 0.5f64.powi(4))).abs() < 1e-9);
        let sq = x.square();
        let inner = Jet::<f64>::variable(1, 5, 0, 0.25).add_scalar(&0.0);
        let c = sq.compose(&[inner]);
        assert!((c.value() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn differentiate_shifts_coefficients() {
        let p = parse_poly("x1^4", 1).unwrap();
        let j = poly_on_jets(&p, &Jet::identity(&[rat(1, 1)], 4));
        let d = j.differentiate(&[2]);
        assert_eq!(d.order(), 2);
        assert_eq!(d.value(), &rat(12, 1));
        assert_eq!(d.derivative(&[1]), rat(24, 1));
    }
}
