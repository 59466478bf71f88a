use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{parse_poly, rat, MultiPoly, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "=")]
    Eq,
}

impl Rel {
    pub fn holds(self, sign: i8) -> bool {
        match self {
            Rel::Gt => sign > 0,
            Rel::Lt => sign < 0,
            Rel::Eq => sign == 0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Gt => ">",
            Rel::Lt => "<",
            Rel::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignCondition {
    pub poly: MultiPoly,
    pub rel: Rel,
}

impl SignCondition {
    pub fn new(poly: MultiPoly, rel: Rel) -> Result<Self> {
        if poly.is_zero() {
            return Err(Error::ZeroPolynomial("sign condition".into()));
        }
        Ok(SignCondition { poly, rel })
    }
}

/// A finite union of conjunctions of polynomial sign conditions, intersected
/// with an open box `(0,1)^d` (`n = 1`) or `(1/n, 1 - 1/n)^d` (`n >= 3`).
#[derive(Clone, Debug)]
pub struct Presentation {
    vars: usize,
    n: u32,
    union: Vec<Vec<SignCondition>>,
    distinct: Vec<MultiPoly>,
    /// For each conjunct, `(index into distinct, relation)`.
    index: Vec<Vec<(usize, Rel)>>,
}

#[derive(Serialize, Deserialize)]
struct BoxRepr {
    n: u32,
}

#[derive(Serialize, Deserialize)]
struct CondRepr {
    poly: String,
    rel: Rel,
}

#[derive(Serialize, Deserialize)]
struct PresRepr {
    vars: usize,
    #[serde(rename = "box", default = "unit_box")]
    bx: BoxRepr,
    union: Vec<Vec<CondRepr>>,
}

fn unit_box() -> BoxRepr {
    BoxRepr { n: 1 }
}

/// Box interval for the shrink parameter `n`.
pub fn box_interval(n: u32) -> Result<(Rational, Rational)> {
    match n {
        1 => Ok((rat(0, 1), rat(1, 1))),
        0 | 2 => Err(Error::Invalid(format!(
            "box parameter n = {n} gives an empty box; use 1 or n >= 3"
        ))),
        _ => Ok((rat(1, n as i64), rat(n as i64 - 1, n as i64))),
    }
}

impl Presentation {
    pub fn new(vars: usize, n: u32, union: Vec<Vec<SignCondition>>) -> Result<Self> {
        if vars == 0 {
            return Err(Error::Invalid(
                "presentation needs at least one variable".into(),
            ));
        }
        box_interval(n)?;
        let mut distinct: Vec<MultiPoly> = Vec::new();
        let mut index = Vec::new();
        for conj in &union {
            let mut row = Vec::new();
            for c in conj {
                if c.poly.is_zero() {
                    return Err(Error::ZeroPolynomial("sign condition".into()));
                }
                if c.poly.nvars() != vars {
                    return Err(Error::DimensionMismatch(format!(
                        "polynomial in {} variables inside a {}-variable presentation",
                        c.poly.nvars(),
                        vars
                    )));
                }
                let k = match distinct.iter().position(|p| p == &c.poly) {
                    Some(k) => k,
                    None => {
                        distinct.push(c.poly.clone());
                        distinct.len() - 1
                    }
                };
                row.push((k, c.rel));
            }
            index.push(row);
        }
        Ok(Presentation {
            vars,
            n,
            union,
            distinct,
            index,
        })
    }

    /// Convenience: conditions given as `(polynomial text, relation)`.
    pub fn from_text(vars: usize, n: u32, union: &[&[(&str, Rel)]]) -> Result<Self> {
        let mut u = Vec::new();
        for conj in union {
            let mut row = Vec::new();
            for (src, rel) in conj.iter() {
                row.push(SignCondition::new(parse_poly(src, vars)?, *rel)?);
            }
            u.push(row);
        }
        Presentation::new(vars, n, u)
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let r: PresRepr = serde_json::from_str(src).map_err(|e| Error::Parse {
            pos: e.column(),
            msg: e.to_string(),
        })?;
        let mut u = Vec::new();
        for conj in r.union {
            let mut row = Vec::new();
            for c in conj {
                row.push(SignCondition::new(parse_poly(&c.poly, r.vars)?, c.rel)?);
            }
            u.push(row);
        }
        Presentation::new(r.vars, r.bx.n, u)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let r = PresRepr {
            vars: self.vars,
            bx: BoxRepr { n: self.n },
            union: self
                .union
                .iter()
                .map(|conj| {
                    conj.iter()
                        .map(|c| CondRepr {
                            poly: c.poly.to_text(),
                            rel: c.rel,
                        })
                        .collect()
                })
                .collect(),
        };
        serde_json::to_value(r).expect("presentation serializes")
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn box_n(&self) -> u32 {
        self.n
    }

    pub fn interval(&self) -> (Rational, Rational) {
        box_interval(self.n).expect("validated on construction")
    }

    pub fn union(&self) -> &[Vec<SignCondition>] {
        &self.union
    }

    /// The same conditions over another box.
    pub fn with_box(&self, n: u32) -> Result<Self> {
        Presentation::new(self.vars, n, self.union.clone())
    }

    /// Distinct polynomials in order of first appearance; sign vectors are
    /// indexed by this list.
    pub fn polys(&self) -> &[MultiPoly] {
        &self.distinct
    }

    /// Sum of total degrees over all occurrences.
    pub fn degree(&self) -> u32 {
        self.union
            .iter()
            .flatten()
            .map(|c| c.poly.total_degree())
            .sum()
    }

    pub fn satisfied_by(&self, signs: &[i8]) -> bool {
        self.index
            .iter()
            .any(|conj| conj.iter().all(|&(k, rel)| rel.holds(signs[k])))
    }

    pub fn sign_vector(&self, point: &[Rational]) -> Result<Vec<i8>> {
        self.distinct
            .iter()
            .map(|p| p.eval(point).map(|v| crate::kernel::sign_of(&v)))
            .collect()
    }

    pub fn in_box(&self, point: &[Rational]) -> bool {
        let (lo, hi) = self.interval();
        point.iter().all(|x| &lo < x && x < &hi)
    }

    /// Exact membership of a rational point.
    pub fn contains(&self, point: &[Rational]) -> Result<bool> {
        if point.len() != self.vars {
            return Err(Error::LengthMismatch(point.len(), self.vars));
        }
        Ok(self.in_box(point) && self.satisfied_by(&self.sign_vector(point)?))
    }
}

/// Sum of total degrees of all polynomial occurrences.
pub fn presentation_degree(pres: &Presentation) -> u32 {
    pres.degree()
}
