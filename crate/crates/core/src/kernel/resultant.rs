use num_traits::{One, Zero};

use super::{MultiPoly, Rational, UPoly};
use crate::error::{Error, Result};

/// Sylvester resultant of `p` and `q` with respect to `var`.
///
/// The result keeps the variable count of the inputs; `var` no longer occurs.
/// Computed as the Sylvester determinant by fraction-free (Bareiss) elimination.
pub fn resultant(p: &MultiPoly, q: &MultiPoly, var: usize) -> Result<MultiPoly> {
    let n = p.nvars().max(q.nvars());
    if var >= n {
        return Err(Error::InvalidVariable {
            index: var,
            nvars: n,
        });
    }
    if p.is_zero() && q.is_zero() {
        return Err(Error::BothZero(var));
    }
    if p.is_zero() || q.is_zero() {
        return Ok(MultiPoly::zero(n));
    }
    let pc = p.coeffs_in(var);
    let qc = q.coeffs_in(var);
    let m1 = pc.len() - 1;
    let m2 = qc.len() - 1;
    let size = m1 + m2;
    if size == 0 {
        return Ok(MultiPoly::one(n));
    }
    let zero = MultiPoly::zero(n);
    let mut m = vec![vec![zero.clone(); size]; size];
    for r in 0..m2 {
        for (k, c) in pc.iter().enumerate() {
            // column of x^k in row r is r + (m1 - k)
            m[r][r + m1 - k] = c.clone();
        }
    }
    for r in 0..m1 {
        for (k, c) in qc.iter().enumerate() {
            m[m2 + r][r + m2 - k] = c.clone();
        }
    }
    Ok(bareiss_det(m, n))
}

fn bareiss_det(mut m: Vec<Vec<MultiPoly>>, nvars: usize) -> MultiPoly {
    let size = m.len();
    let mut negate = false;
    let mut prev = MultiPoly::one(nvars);
    for k in 0..size.saturating_sub(1) {
        if m[k][k].is_zero() {
            match (k + 1..size).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    negate = !negate;
                }
                None => return MultiPoly::zero(nvars),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let num = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_exact(&prev).expect("Bareiss step divides exactly");
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[size - 1][size - 1].clone();
    if negate {
        -&det
    } else {
        det
    }
}

/// Resultant of two univariate polynomials, as a rational number.
pub fn resultant_upoly(p: &UPoly, q: &UPoly) -> Rational {
    let pm = MultiPoly::from_upoly(1, 0, p);
    let qm = MultiPoly::from_upoly(1, 0, q);
    if p.is_zero() || q.is_zero() {
        return Rational::zero();
    }
    resultant(&pm, &qm, 0)
        .map(|r| r.constant_term())
        .unwrap_or_else(|_| Rational::one())
}

/// `Res_var(p, dp/dvar)`: vanishes where `p` has a repeated root in `var`
/// or its leading coefficient drops.
pub fn discriminant(p: &MultiPoly, var: usize) -> Result<MultiPoly> {
    let dp = p.derivative(var)?;
    if dp.is_zero() {
        return Ok(MultiPoly::one(p.nvars()));
    }
    resultant(p, &dp, var)
}
