use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::{fmt_rational, rational_to_f64, Rational, UPoly};
use crate::error::{Error, Result};

/// Exponent vector, one entry per variable.
pub type Monomial = Vec<u32>;

/// Sparse multivariate polynomial over the rationals in `nvars` variables
/// `x1..x_nvars` (index 0 is `x1`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    /// The variable `x_{index+1}`.
    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rational::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    /// Embed a univariate polynomial as a polynomial in `x_{var+1}`.
    pub fn from_upoly(nvars: usize, var: usize, u: &UPoly) -> Self {
        let mut p = Self::zero(nvars);
        for (k, c) in u.coeffs().iter().enumerate() {
            let mut e = vec![0; nvars];
            e[var] = k as u32;
            p.add_term(e, c.clone());
        }
        p
    }

    fn add_term(&mut self, e: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    /// Indices of variables that actually occur.
    pub fn used_vars(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&v| self.terms.keys().any(|e| e[v] > 0))
            .collect()
    }

    fn check_var(&self, var: usize) -> Result<()> {
        if var >= self.nvars {
            return Err(Error::InvalidVariable {
                index: var,
                nvars: self.nvars,
            });
        }
        Ok(())
    }

    pub fn derivative(&self, var: usize) -> Result<MultiPoly> {
        self.check_var(var)?;
        let mut out = MultiPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.add_term(e2, c * Rational::from_integer(e[var].into()));
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Rational) -> MultiPoly {
        MultiPoly::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, c)| (e.clone(), c * s)),
        )
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.nvars {
            return Err(Error::LengthMismatch(point.len(), self.nvars));
        }
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                rational_to_f64(c)
                    * e.iter()
                        .zip(point)
                        .map(|(&k, x)| x.powi(k as i32))
                        .product::<f64>()
            })
            .sum()
    }

    /// Enclosure of the range over a box by naive interval arithmetic.
    pub fn eval_interval(&self, boxes: &[(Rational, Rational)]) -> (Rational, Rational) {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = (c.clone(), c.clone());
            for (b, &k) in boxes.iter().zip(e) {
                if k > 0 {
                    t = interval_mul(&t, &interval_pow(b, k));
                }
            }
            lo += t.0;
            hi += t.1;
        }
        (lo, hi)
    }

    /// Substitute a rational value for one variable; the variable count is kept.
    pub fn substitute(&self, var: usize, value: &Rational) -> Result<MultiPoly> {
        self.check_var(var)?;
        let mut out = MultiPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for _ in 0..e[var] {
                t *= value;
            }
            let mut e2 = e.clone();
            e2[var] = 0;
            out.add_term(e2, t);
        }
        Ok(out)
    }

    /// Replace each variable by a polynomial (all in a common variable count).
    pub fn compose(&self, args: &[MultiPoly]) -> Result<MultiPoly> {
        if args.len() != self.nvars {
            return Err(Error::LengthMismatch(args.len(), self.nvars));
        }
        let m = args.first().map(|a| a.nvars).unwrap_or(0);
        let mut out = MultiPoly::zero(m);
        let mut cache: Vec<Vec<MultiPoly>> = args
            .iter()
            .map(|a| vec![MultiPoly::one(a.nvars), a.clone()])
            .collect();
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                while cache[i].len() <= k as usize {
                    let next = &cache[i][cache[i].len() - 1] * &args[i];
                    cache[i].push(next);
                }
                t = &t * &cache[i][k as usize];
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Univariate view when only `var` occurs.
    pub fn to_upoly(&self, var: usize) -> Result<UPoly> {
        self.check_var(var)?;
        let mut coeffs = vec![Rational::zero(); self.degree_in(var) as usize + 1];
        for (e, c) in &self.terms {
            if e.iter().enumerate().any(|(i, &k)| i != var && k > 0) {
                return Err(Error::Invalid(format!(
                    "polynomial is not univariate in x{}",
                    var + 1
                )));
            }
            coeffs[e[var] as usize] += c;
        }
        Ok(UPoly::new(coeffs))
    }

    /// Univariate view of a polynomial that uses at most one variable.
    pub fn as_univariate(&self) -> Result<UPoly> {
        match self.used_vars().as_slice() {
            [] => Ok(UPoly::constant(self.constant_term())),
            [v] => self.to_upoly(*v),
            _ => Err(Error::Invalid("polynomial is not univariate".into())),
        }
    }

    /// Coefficients with respect to `var`, as polynomials in the same variable set
    /// (with `var` absent), lowest power first.
    pub fn coeffs_in(&self, var: usize) -> Vec<MultiPoly> {
        let deg = self.degree_in(var) as usize;
        let mut out = vec![MultiPoly::zero(self.nvars); deg + 1];
        if self.is_zero() {
            return out;
        }
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[var] as usize;
            e2[var] = 0;
            out[k].add_term(e2, c.clone());
        }
        out
    }

    /// Exact division; `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        if d.is_zero() {
            return None;
        }
        let mut rem = self.clone();
        let mut q = MultiPoly::zero(self.nvars);
        let (lm_d, lc_d) = d
            .terms
            .iter()
            .next_back()
            .map(|(e, c)| (e.clone(), c.clone()))?;
        while let Some((lm, lc)) = rem
            .terms
            .iter()
            .next_back()
            .map(|(e, c)| (e.clone(), c.clone()))
        {
            if lm.iter().zip(&lm_d).any(|(a, b)| a < b) {
                return None;
            }
            let e: Monomial = lm.iter().zip(&lm_d).map(|(a, b)| a - b).collect();
            let c = lc / &lc_d;
            let t = MultiPoly::from_terms(self.nvars, [(e, c)]);
            rem = &rem - &(&t * d);
            q = &q + &t;
        }
        Some(q)
    }

    /// Rename variables into a larger (or permuted) variable set: variable `i`
    /// becomes `map[i]` in a polynomial with `nvars` variables.
    pub fn remap(&self, nvars: usize, map: &[usize]) -> MultiPoly {
        MultiPoly::from_terms(
            nvars,
            self.terms.iter().map(|(e, c)| {
                let mut e2 = vec![0; nvars];
                for (i, &k) in e.iter().enumerate() {
                    e2[map[i]] += k;
                }
                (e2, c.clone())
            }),
        )
    }

    /// Canonical text form in the `x1..xd` grammar, highest terms first.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (i, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| {
                    if k == 1 {
                        format!("x{}", v + 1)
                    } else {
                        format!("x{}^{}", v + 1, k)
                    }
                })
                .collect();
            let coef = fmt_rational(&mag);
            let coef = if coef.contains('/') {
                format!("({coef})")
            } else {
                coef
            };
            if mono.is_empty() {
                out.push_str(&coef);
            } else if mag.is_one() {
                out.push_str(&mono.join("*"));
            } else {
                out.push_str(&format!("{}*{}", coef, mono.join("*")));
            }
        }
        out
    }
}

fn interval_mul(a: &(Rational, Rational), b: &(Rational, Rational)) -> (Rational, Rational) {
    let c = [&a.0 * &b.0, &a.0 * &b.1, &a.1 * &b.0, &a.1 * &b.1];
    let lo = c.iter().min().cloned().unwrap_or_default();
    let hi = c.iter().max().cloned().unwrap_or_default();
    (lo, hi)
}

fn interval_pow(b: &(Rational, Rational), k: u32) -> (Rational, Rational) {
    let p = |x: &Rational| (0..k).fold(Rational::one(), |acc, _| acc * x);
    let (l, h) = (p(&b.0), p(&b.1));
    if k % 2 == 1 {
        (l, h)
    } else if b.0.is_negative() && b.1.is_positive() {
        (Rational::zero(), l.max(h))
    } else if l <= h {
        (l, h)
    } else {
        (h, l)
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, o: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, o: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, o: &MultiPoly) -> MultiPoly {
        let n = self.nvars.max(o.nvars);
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let e: Monomial = (0..n)
                    .map(|i| a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0))
                    .collect();
                *acc.entry(e).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        MultiPoly {
            nvars: n,
            terms: acc,
        }
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-Rational::one())
    }
}

impl serde::Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_text())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{int, parse_poly};

    fn p(s: &str, n: usize) -> MultiPoly {
        parse_poly(s, n).unwrap()
    }

    #[test]
    fn derivative_examples() {
        let q = p("x1^2*x2", 2);
        assert_eq!(q.derivative(0).unwrap(), p("2*x1*x2", 2));
        assert_eq!(q.derivative(1).unwrap(), p("x1^2", 2));
        assert!(p("3", 1).derivative(0).unwrap().is_zero());
        assert!(matches!(
            q.derivative(2),
            Err(Error::InvalidVariable { .. })
        ));
    }

    #[test]
    fn zero_polynomial_degree_is_zero() {
        assert_eq!(MultiPoly::zero(2).total_degree(), 0);
        assert_eq!(p("x1^2*x2 + x2", 2).total_degree(), 3);
    }

    #[test]
    fn exact_division() {
        let a = p("x1 + x2", 2);
        let b = p("x1 - 2*x2 + 1", 2);
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a).unwrap(), b);
        assert!(p("x1^2 + 1", 2).div_exact(&p("x1 + 1", 2)).is_none());
    }

    #[test]
    fn text_round_trip() {
        let q = p("(3/2)*x1^2*x2 - x2 + 1", 2);
        assert_eq!(q.to_text(), "(3/2)*x1^2*x2 - x2 + 1");
        assert_eq!(p(&q.to_text(), 2), q);
    }

    #[test]
    fn compose_and_substitute() {
        let q = p("x1^2 + x2", 2);
        let c = q.compose(&[p("x1 + 1", 1), p("x1", 1)]).unwrap();
        assert_eq!(c, p("x1^2 + 3*x1 + 1", 1));
        assert_eq!(q.substitute(0, &int(2)).unwrap(), p("x2 + 4", 2));
    }
}
