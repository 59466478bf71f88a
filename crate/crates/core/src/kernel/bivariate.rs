//! Gcd and square-free parts of polynomials in two variables, viewed as
//! polynomials in `var` with coefficients in the other variable.

use num_traits::One;

use super::{MultiPoly, Rational, UPoly};

fn other(var: usize) -> usize {
    1 - var
}

fn lead_in(p: &MultiPoly, var: usize) -> MultiPoly {
    p.coeffs_in(var)
        .pop()
        .unwrap_or_else(|| MultiPoly::zero(p.nvars()))
}

/// Pseudo-remainder of `a` by `b` in `var` (up to a power of `lc(b)`).
pub fn prem(a: &MultiPoly, b: &MultiPoly, var: usize) -> MultiPoly {
    let db = b.degree_in(var);
    let lcb = lead_in(b, var);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(var) >= db {
        let dr = r.degree_in(var);
        let mut e = vec![0; a.nvars()];
        e[var] = dr - db;
        let t = &lead_in(&r, var) * &MultiPoly::from_terms(a.nvars(), [(e, Rational::one())]);
        r = &(&lcb * &r) - &(&t * b);
    }
    r
}

/// Gcd of the coefficients in `var`, as a monic polynomial in the other variable.
pub fn content_in(p: &MultiPoly, var: usize) -> UPoly {
    let o = other(var);
    let mut g = UPoly::zero();
    for c in p.coeffs_in(var) {
        if c.is_zero() {
            continue;
        }
        let u = c.to_upoly(o).expect("coefficient in the other variable");
        g = if g.is_zero() { u.monic() } else { g.gcd(&u) };
        if g.degree() == 0 {
            return UPoly::constant(Rational::one());
        }
    }
    g
}

pub fn primitive_part(p: &MultiPoly, var: usize) -> MultiPoly {
    if p.is_zero() {
        return p.clone();
    }
    let c = MultiPoly::from_upoly(p.nvars(), other(var), &content_in(p, var));
    p.div_exact(&c).expect("content divides")
}

/// Greatest common divisor (up to a rational factor).
pub fn gcd_in(a: &MultiPoly, b: &MultiPoly, var: usize) -> MultiPoly {
    let n = a.nvars().max(b.nvars());
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    let gc = content_in(a, var).gcd(&content_in(b, var));
    let (mut p, mut q) = (primitive_part(a, var), primitive_part(b, var));
    if p.degree_in(var) < q.degree_in(var) {
        std::mem::swap(&mut p, &mut q);
    }
    while !q.is_zero() {
        let r = prem(&p, &q, var);
        p = q;
        q = if r.is_zero() {
            r
        } else {
            primitive_part(&r, var)
        };
    }
    let pp = if p.degree_in(var) == 0 {
        MultiPoly::one(n)
    } else {
        primitive_part(&p, var)
    };
    &MultiPoly::from_upoly(n, other(var), &gc) * &pp
}

/// `p` with repeated factors of positive degree in `var` reduced to
/// multiplicity one. Factors free of `var` are kept as they are.
pub fn square_free_in(p: &MultiPoly, var: usize) -> MultiPoly {
    if p.degree_in(var) == 0 {
        return p.clone();
    }
    let d = p.derivative(var).expect("variable in range");
    let g = primitive_part(&gcd_in(p, &d, var), var);
    if g.degree_in(var) == 0 {
        return p.clone();
    }
    p.div_exact(&g).expect("gcd divides")
}
