use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::bivariate::{content_in, gcd_in, square_free_in};
use crate::kernel::sturm::isolate_upoly;
use crate::kernel::{
    discriminant, rational_from_f64, resultant, serde_rational, simplest_between, AlgebraicNumber,
    MultiPoly, Rational,
};

use super::presentation::Presentation;

/// Bisection budget when deciding the sign of a bivariate polynomial at a
/// point with two irrational coordinates.
const PAIR_REFINE_STEPS: usize = 110;
const BRANCH_CACHE_LIMIT: usize = 4096;

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseCell1D {
    Open {
        lo: AlgebraicNumber,
        hi: AlgebraicNumber,
    },
    Point {
        at: AlgebraicNumber,
    },
}

/// Rational bounds `(a, b)` with `lo <= a < b <= hi`.
fn inner_bounds(lo: &AlgebraicNumber, hi: &AlgebraicNumber) -> (Rational, Rational) {
    let (mut l, mut h) = (lo.clone(), hi.clone());
    while l.hi() >= h.lo() {
        l.refine_once();
        h.refine_once();
    }
    (l.hi().clone(), h.lo().clone())
}

/// A simple rational strictly between two distinct algebraic numbers.
pub fn rational_between(lo: &AlgebraicNumber, hi: &AlgebraicNumber) -> Rational {
    let (a, b) = inner_bounds(lo, hi);
    simplest_between(&a, &b)
}

impl BaseCell1D {
    pub fn dim(&self) -> usize {
        match self {
            BaseCell1D::Open { .. } => 1,
            BaseCell1D::Point { .. } => 0,
        }
    }

    pub fn contains(&self, y: &Rational) -> bool {
        match self {
            BaseCell1D::Open { lo, hi } => {
                lo.cmp_rational(y) == std::cmp::Ordering::Less
                    && hi.cmp_rational(y) == std::cmp::Ordering::Greater
            }
            BaseCell1D::Point { at } => at.cmp_rational(y) == std::cmp::Ordering::Equal,
        }
    }

    /// A rational point of the cell, if it has one.
    pub fn sample(&self) -> Option<Rational> {
        match self {
            BaseCell1D::Open { lo, hi } => Some(rational_between(lo, hi)),
            BaseCell1D::Point { at } => at.as_rational().cloned(),
        }
    }

    /// `k` evenly spaced rational points inside an open cell.
    pub fn samples(&self, k: usize) -> Vec<Rational> {
        match self {
            BaseCell1D::Open { lo, hi } => {
                let (a, b) = inner_bounds(lo, hi);
                (1..=k)
                    .map(|j| {
                        &a + (&b - &a) * Rational::new((j as i64).into(), (k as i64 + 1).into())
                    })
                    .collect()
            }
            BaseCell1D::Point { at } => at.as_rational().cloned().into_iter().collect(),
        }
    }

    pub fn bounds_f64(&self) -> (f64, f64) {
        match self {
            BaseCell1D::Open { lo, hi } => (lo.to_f64(), hi.to_f64()),
            BaseCell1D::Point { at } => (at.to_f64(), at.to_f64()),
        }
    }
}

/// The `index`-th smallest root (from 0) of `fiber(., y)` inside the fiber
/// interval, for `y` in an open base cell. The fiber variable is `x1`, the
/// base variable `x2`.
#[derive(Clone, Debug, Serialize)]
pub struct NashBranch {
    pub fiber: MultiPoly,
    pub index: usize,
    /// Number of roots of `fiber(., y)` in the fiber interval, constant over the cell.
    pub count: usize,
    pub cell: BaseCell1D,
    #[serde(with = "serde_rational")]
    pub fiber_lo: Rational,
    #[serde(with = "serde_rational")]
    pub fiber_hi: Rational,
    #[serde(skip)]
    cache: Arc<RwLock<HashMap<Rational, AlgebraicNumber>>>,
}

impl NashBranch {
    pub fn new(
        fiber: MultiPoly,
        index: usize,
        count: usize,
        cell: BaseCell1D,
        fiber_interval: (Rational, Rational),
    ) -> Self {
        NashBranch {
            fiber,
            index,
            count,
            cell,
            fiber_lo: fiber_interval.0,
            fiber_hi: fiber_interval.1,
            cache: Arc::default(),
        }
    }

    /// Exact branch value at a rational base point.
    pub fn root_at(&self, y: &Rational) -> Result<AlgebraicNumber> {
        if !self.cell.contains(y) {
            return Err(Error::OutsideDomain(format!(
                "base point {y} is outside the branch cell"
            )));
        }
        if let Some(v) = self.cache.read().unwrap_or_else(|e| e.into_inner()).get(y) {
            return Ok(v.clone());
        }
        let u = self.fiber.substitute(1, y)?.to_upoly(0)?;
        if u.is_zero() {
            return Err(Error::DegenerateCell(format!(
                "fiber {} vanishes at x2 = {y}",
                self.fiber
            )));
        }
        let roots = isolate_upoly(&u, &self.fiber_lo, &self.fiber_hi)?;
        if roots.len() != self.count {
            return Err(Error::DegenerateCell(format!(
                "fiber {} has {} roots at x2 = {y}, expected {}",
                self.fiber,
                roots.len(),
                self.count
            )));
        }
        let v = roots[self.index].clone();
        let mut cache = self.cache.write().unwrap_or_else(|e| e.into_inner());
        if cache.len() >= BRANCH_CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(y.clone(), v.clone());
        Ok(v)
    }

    pub fn value_f64(&self, y: f64) -> Result<f64> {
        Ok(self.root_at(&rational_from_f64(y))?.to_f64())
    }
}

/// A boundary of a slice in the fiber direction.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    BoxBottom,
    BoxTop,
    Branch(NashBranch),
    /// A fiber point over a point base cell.
    Point {
        at: AlgebraicNumber,
    },
}

impl Bound {
    pub fn value_at(
        &self,
        y: &Rational,
        interval: &(Rational, Rational),
    ) -> Result<AlgebraicNumber> {
        Ok(match self {
            Bound::BoxBottom => AlgebraicNumber::from_rational(interval.0.clone()),
            Bound::BoxTop => AlgebraicNumber::from_rational(interval.1.clone()),
            Bound::Branch(b) => b.root_at(y)?,
            Bound::Point { at } => at.clone(),
        })
    }
}

/// Sorted fiber boundaries over one base cell.
#[derive(Clone, Debug, Serialize)]
pub struct Column {
    pub base: BaseCell1D,
    pub bounds: Vec<Bound>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub vars: usize,
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
    pub polys: Vec<MultiPoly>,
    /// Square-free, pairwise coprime factors of the inputs.
    pub basis: Vec<MultiPoly>,
    /// Polynomials in the base variable whose roots delimit the base cells.
    pub projection: Vec<MultiPoly>,
    pub max_input_degree: u32,
    pub max_projection_degree: u32,
    pub columns: Vec<Column>,
}

impl Decomposition {
    pub fn interval(&self) -> (Rational, Rational) {
        (self.lo.clone(), self.hi.clone())
    }

    pub fn projection_degree_ok(&self) -> bool {
        self.max_projection_degree <= self.max_input_degree * self.max_input_degree
    }

    pub fn to_json(&self, slices: Option<&[Slice]>) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("decomposition serializes");
        if let Some(s) = slices {
            v["slices"] = serde_json::to_value(s).expect("slices serialize");
        }
        v
    }
}

fn merge_points(mut pts: Vec<AlgebraicNumber>) -> Vec<AlgebraicNumber> {
    pts.sort_by(|a, b| a.cmp_exact(b));
    pts.dedup_by(|a, b| a.cmp_exact(b) == std::cmp::Ordering::Equal);
    pts
}

fn line_cells(points: &[AlgebraicNumber], lo: &Rational, hi: &Rational) -> Vec<BaseCell1D> {
    let mut cells = Vec::new();
    let mut prev = AlgebraicNumber::from_rational(lo.clone());
    for p in points {
        cells.push(BaseCell1D::Open {
            lo: prev,
            hi: p.clone(),
        });
        cells.push(BaseCell1D::Point { at: p.clone() });
        prev = p.clone();
    }
    cells.push(BaseCell1D::Open {
        lo: prev,
        hi: AlgebraicNumber::from_rational(hi.clone()),
    });
    cells
}

fn check_interval(lo: &Rational, hi: &Rational) -> Result<()> {
    if lo >= hi {
        return Err(Error::InvalidInterval(format!("({lo}, {hi})")));
    }
    Ok(())
}

/// Decomposition of an interval by the roots of univariate polynomials.
pub fn cad_line(polys: &[MultiPoly], lo: &Rational, hi: &Rational) -> Result<Decomposition> {
    check_interval(lo, hi)?;
    let mut points = Vec::new();
    let mut basis = Vec::new();
    for p in polys {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial("cad_line input".into()));
        }
        let u = p.as_univariate()?.square_free();
        if u.degree() == 0 {
            continue;
        }
        points.extend(isolate_upoly(&u, lo, hi)?);
        basis.push(MultiPoly::from_upoly(1, 0, &u));
    }
    let points = merge_points(points);
    let max_input_degree = polys.iter().map(MultiPoly::total_degree).max().unwrap_or(0);
    Ok(Decomposition {
        vars: 1,
        lo: lo.clone(),
        hi: hi.clone(),
        polys: polys.to_vec(),
        projection: basis.clone(),
        basis,
        max_input_degree,
        max_projection_degree: max_input_degree,
        columns: line_cells(&points, lo, hi)
            .into_iter()
            .map(|base| Column {
                base,
                bounds: Vec::new(),
            })
            .collect(),
    })
}

/// Scale so the lexicographically largest term has coefficient one.
fn normalize(p: &MultiPoly) -> MultiPoly {
    match p.terms().last() {
        Some((_, c)) => p.scale(&(Rational::from_integer(1.into()) / c)),
        None => p.clone(),
    }
}

/// Square-free (in `x1`), pairwise coprime, nonconstant factors of the inputs.
pub fn coprime_basis(polys: &[MultiPoly]) -> Vec<MultiPoly> {
    let mut basis: Vec<MultiPoly> = Vec::new();
    let push = |basis: &mut Vec<MultiPoly>, p: MultiPoly| {
        let p = normalize(&p);
        if p.total_degree() >= 1 && !basis.contains(&p) {
            basis.push(p);
        }
    };
    for p in polys {
        push(&mut basis, square_free_in(p, 0));
    }
    'outer: loop {
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                let g = gcd_in(&basis[i], &basis[j], 0);
                if g.total_degree() >= 1 {
                    let a = basis[i].div_exact(&g).expect("gcd divides");
                    let b = basis[j].div_exact(&g).expect("gcd divides");
                    basis.remove(j);
                    basis.remove(i);
                    for q in [a, b, g] {
                        push(&mut basis, q);
                    }
                    continue 'outer;
                }
            }
        }
        break;
    }
    basis
}

/// Sign of a bivariate polynomial at `(x, y)`, exact whenever one
/// coordinate is rational.
pub fn sign_at_pair(p: &MultiPoly, x: &AlgebraicNumber, y: &AlgebraicNumber) -> i8 {
    if let Some(xq) = x.as_rational() {
        let u = p
            .substitute(0, xq)
            .and_then(|q| q.to_upoly(1))
            .expect("bivariate polynomial");
        return y.sign_of(&u);
    }
    if let Some(yq) = y.as_rational() {
        let u = p
            .substitute(1, yq)
            .and_then(|q| q.to_upoly(0))
            .expect("bivariate polynomial");
        return x.sign_of(&u);
    }
    let (mut a, mut b) = (x.clone(), y.clone());
    for _ in 0..PAIR_REFINE_STEPS {
        if a.as_rational().is_some() || b.as_rational().is_some() {
            return sign_at_pair(p, &a, &b);
        }
        let (l, h) = p.eval_interval(&[
            (a.lo().clone(), a.hi().clone()),
            (b.lo().clone(), b.hi().clone()),
        ]);
        if l > Rational::from_integer(0.into()) {
            return 1;
        }
        if h < Rational::from_integer(0.into()) {
            return -1;
        }
        a.refine_once();
        b.refine_once();
    }
    0
}

/// Sign of `p` at a point given by exact coordinates (one or two).
pub fn sign_at_coords(p: &MultiPoly, coords: &[AlgebraicNumber]) -> Result<i8> {
    match coords {
        [x] => Ok(x.sign_of(&p.to_upoly(0)?)),
        [x, y] => Ok(sign_at_pair(p, x, y)),
        _ => Err(Error::Unsupported(format!(
            "sign evaluation in {} variables",
            coords.len()
        ))),
    }
}

fn projection_set(basis: &[MultiPoly], lo: &Rational, hi: &Rational) -> Result<Vec<MultiPoly>> {
    let mut out = Vec::new();
    for (i, b) in basis.iter().enumerate() {
        if b.degree_in(0) == 0 {
            out.push(b.clone());
            continue;
        }
        out.push(discriminant(b, 0)?);
        let coeffs = b.coeffs_in(0);
        out.push(coeffs.last().cloned().expect("nonzero"));
        if !coeffs[0].is_zero() {
            out.push(coeffs[0].clone());
        }
        for e in [lo, hi] {
            // factors x1 - e only contribute roots on the excluded box edge
            let lin = &MultiPoly::var(2, 0) - &MultiPoly::constant(2, e.clone());
            let mut c = b.clone();
            while c.substitute(0, e)?.is_zero() {
                c = c.div_exact(&lin).expect("edge factor divides");
            }
            out.push(c.substitute(0, e)?);
        }
        for c in &basis[i + 1..] {
            if c.degree_in(0) >= 1 {
                out.push(resultant(b, c, 0)?);
            }
        }
    }
    Ok(out)
}

/// Cylindrical decomposition of a square with fiber variable `x1` over
/// base variable `x2`.
pub fn cad_plane(polys: &[MultiPoly], lo: &Rational, hi: &Rational) -> Result<Decomposition> {
    check_interval(lo, hi)?;
    for p in polys {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial("cad_plane input".into()));
        }
        if p.nvars() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "cad_plane expects 2 variables, got {}",
                p.nvars()
            )));
        }
    }
    let basis = coprime_basis(polys);
    let projection = projection_set(&basis, lo, hi)?;
    let mut points = Vec::new();
    let mut kept = Vec::new();
    for q in &projection {
        if q.is_zero() {
            return Err(Error::DegenerateCell(
                "a projection polynomial vanishes identically; remove common factors first".into(),
            ));
        }
        let u = q.to_upoly(1)?.square_free();
        if u.degree() >= 1 {
            points.extend(isolate_upoly(&u, lo, hi)?);
            kept.push(normalize(&MultiPoly::from_upoly(2, 1, &u)));
        }
    }
    kept.dedup();
    let points = merge_points(points);
    let interval = (lo.clone(), hi.clone());
    let mut columns = Vec::new();
    for base in line_cells(&points, lo, hi) {
        let bounds = match &base {
            BaseCell1D::Open { .. } => open_column(&basis, &base, &interval)?,
            BaseCell1D::Point { at } => point_column(&basis, at, &interval)?,
        };
        columns.push(Column { base, bounds });
    }
    Ok(Decomposition {
        vars: 2,
        lo: lo.clone(),
        hi: hi.clone(),
        polys: polys.to_vec(),
        basis,
        max_input_degree: polys.iter().map(MultiPoly::total_degree).max().unwrap_or(0),
        max_projection_degree: projection
            .iter()
            .map(MultiPoly::total_degree)
            .max()
            .unwrap_or(0),
        projection: kept,
        columns,
    })
}

fn open_column(
    basis: &[MultiPoly],
    base: &BaseCell1D,
    interval: &(Rational, Rational),
) -> Result<Vec<Bound>> {
    let y = base.sample().expect("open cells have rational points");
    let mut entries: Vec<(AlgebraicNumber, NashBranch)> = Vec::new();
    for b in basis.iter().filter(|b| b.degree_in(0) >= 1) {
        let u = b.substitute(1, &y)?.to_upoly(0)?;
        if u.is_zero() {
            return Err(Error::DegenerateCell(format!(
                "{b} vanishes on an open base cell"
            )));
        }
        let roots = isolate_upoly(&u, &interval.0, &interval.1)?;
        let count = roots.len();
        for (k, r) in roots.into_iter().enumerate() {
            let nb = NashBranch::new(b.clone(), k, count, base.clone(), interval.clone());
            nb.cache
                .write()
                .unwrap_or_else(|e| e.into_inner())
                .insert(y.clone(), r.clone());
            entries.push((r, nb));
        }
    }
    entries.sort_by(|a, b| a.0.cmp_exact(&b.0));
    if entries
        .windows(2)
        .any(|w| w[0].0.cmp_exact(&w[1].0) == std::cmp::Ordering::Equal)
    {
        return Err(Error::DegenerateCell(format!(
            "branches meet over the open base cell at x2 = {y}"
        )));
    }
    Ok(entries.into_iter().map(|(_, b)| Bound::Branch(b)).collect())
}

fn point_column(
    basis: &[MultiPoly],
    y0: &AlgebraicNumber,
    interval: &(Rational, Rational),
) -> Result<Vec<Bound>> {
    let mut roots = Vec::new();
    for b in basis.iter().filter(|b| b.degree_in(0) >= 1) {
        let coeffs = b.coeffs_in(0);
        let mut all_zero = true;
        for c in &coeffs {
            if y0.sign_of(&c.to_upoly(1)?) != 0 {
                all_zero = false;
                break;
            }
        }
        if all_zero {
            // vanishes on the whole vertical line; contributes no fiber points
            continue;
        }
        if let Some(yq) = y0.as_rational() {
            let u = b.substitute(1, yq)?.to_upoly(0)?;
            roots.extend(isolate_upoly(&u, &interval.0, &interval.1)?);
            continue;
        }
        // factors of the content that do not vanish at y0 would kill the resultant
        let mut mu = y0.poly().clone();
        let g = mu.gcd(&content_in(b, 0));
        if g.degree() >= 1 {
            mu = mu.div_rem(&g).0;
        }
        let m = MultiPoly::from_upoly(2, 1, &mu);
        let r = resultant(b, &m, 1)?.to_upoly(0)?;
        if r.is_zero() {
            return Err(Error::DegenerateCell(format!(
                "{b} shares a factor with the minimal polynomial of x2"
            )));
        }
        for cand in isolate_upoly(&r, &interval.0, &interval.1)? {
            if sign_at_pair(b, &cand, y0) == 0 {
                roots.push(cand);
            }
        }
    }
    Ok(merge_points(roots)
        .into_iter()
        .map(|at| Bound::Point { at })
        .collect())
}

/// A slice restricted to one horizontal line.
#[derive(Clone, Debug)]
pub enum RowTest {
    Whole,
    Between(AlgebraicNumber, AlgebraicNumber),
    At(AlgebraicNumber),
}

impl RowTest {
    pub fn contains(&self, x: &Rational) -> bool {
        use std::cmp::Ordering::*;
        match self {
            RowTest::Whole => true,
            RowTest::Between(lo, hi) => lo.cmp_rational(x) == Less && hi.cmp_rational(x) == Greater,
            RowTest::At(v) => v.cmp_rational(x) == Equal,
        }
    }
}

/// Fiber part of a slice.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiberPart {
    /// One-variable sets: the slice is the base cell itself.
    Whole,
    Sector {
        lower: Bound,
        upper: Bound,
    },
    Section {
        graph: Bound,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct Slice {
    pub base: BaseCell1D,
    pub fiber: FiberPart,
    pub signs: Vec<i8>,
    #[serde(with = "serde_rational")]
    pub box_lo: Rational,
    #[serde(with = "serde_rational")]
    pub box_hi: Rational,
}

impl Slice {
    pub fn dim(&self) -> usize {
        self.base.dim() + usize::from(matches!(self.fiber, FiberPart::Sector { .. }))
    }

    pub fn interval(&self) -> (Rational, Rational) {
        (self.box_lo.clone(), self.box_hi.clone())
    }

    pub fn is_sector(&self) -> bool {
        matches!(self.fiber, FiberPart::Sector { .. })
    }

    /// Exact membership of a rational point.
    pub fn contains(&self, point: &[Rational]) -> Result<bool> {
        use std::cmp::Ordering::*;
        let iv = self.interval();
        match &self.fiber {
            FiberPart::Whole => Ok(self.base.contains(&point[0])),
            FiberPart::Sector { lower, upper } => {
                let (x, y) = (&point[0], &point[1]);
                if !self.base.contains(y) {
                    return Ok(false);
                }
                Ok(lower.value_at(y, &iv)?.cmp_rational(x) == Less
                    && upper.value_at(y, &iv)?.cmp_rational(x) == Greater)
            }
            FiberPart::Section { graph } => {
                let (x, y) = (&point[0], &point[1]);
                if !self.base.contains(y) {
                    return Ok(false);
                }
                Ok(graph.value_at(y, &iv)?.cmp_rational(x) == Equal)
            }
        }
    }

    /// Membership test for points `(x, y)` with `y` fixed; `None` when the
    /// slice misses that horizontal line.
    pub fn row(&self, y: &Rational) -> Result<Option<RowTest>> {
        let iv = self.interval();
        if !self.base.contains(y) {
            return Ok(None);
        }
        Ok(Some(match &self.fiber {
            FiberPart::Whole => RowTest::Whole,
            FiberPart::Sector { lower, upper } => {
                RowTest::Between(lower.value_at(y, &iv)?, upper.value_at(y, &iv)?)
            }
            FiberPart::Section { graph } => RowTest::At(graph.value_at(y, &iv)?),
        }))
    }

    /// Exact sample points, about `k` of them for full-dimensional pieces.
    pub fn samples(&self, k: usize) -> Result<Vec<Vec<AlgebraicNumber>>> {
        let iv = self.interval();
        let alg = |q: Rational| AlgebraicNumber::from_rational(q);
        let mut out = Vec::new();
        match (&self.fiber, &self.base) {
            (FiberPart::Whole, BaseCell1D::Open { .. }) => {
                out.extend(self.base.samples(k).into_iter().map(|x| vec![alg(x)]));
            }
            (FiberPart::Whole, BaseCell1D::Point { at }) => out.push(vec![at.clone()]),
            (FiberPart::Sector { lower, upper }, BaseCell1D::Open { .. }) => {
                let m = (k as f64).sqrt().ceil() as usize;
                for y in self.base.samples(m) {
                    let cell = BaseCell1D::Open {
                        lo: lower.value_at(&y, &iv)?,
                        hi: upper.value_at(&y, &iv)?,
                    };
                    for x in cell.samples(m) {
                        out.push(vec![alg(x), alg(y.clone())]);
                    }
                }
            }
            (FiberPart::Sector { lower, upper }, BaseCell1D::Point { at }) => {
                let y = at.as_rational().cloned().unwrap_or_default();
                let cell = BaseCell1D::Open {
                    lo: lower.value_at(&y, &iv)?,
                    hi: upper.value_at(&y, &iv)?,
                };
                for x in cell.samples(k) {
                    out.push(vec![alg(x), at.clone()]);
                }
            }
            (FiberPart::Section { graph }, BaseCell1D::Open { .. }) => {
                for y in self.base.samples(k) {
                    out.push(vec![graph.value_at(&y, &iv)?, alg(y)]);
                }
            }
            (FiberPart::Section { graph }, BaseCell1D::Point { at }) => {
                let y = at.as_rational().cloned().unwrap_or_default();
                out.push(vec![graph.value_at(&y, &iv)?, at.clone()]);
            }
        }
        Ok(out)
    }
}

/// Decompose the box of a presentation by all of its polynomials.
pub fn decompose(pres: &Presentation) -> Result<Decomposition> {
    let (lo, hi) = pres.interval();
    match pres.vars() {
        1 => cad_line(pres.polys(), &lo, &hi),
        2 => cad_plane(pres.polys(), &lo, &hi),
        d => Err(Error::Unsupported(format!(
            "decomposition in dimension {d}"
        ))),
    }
}

fn signs_at(pres: &Presentation, coords: &[AlgebraicNumber]) -> Result<Vec<i8>> {
    pres.polys()
        .iter()
        .map(|p| sign_at_coords(p, coords))
        .collect()
}

/// The sectors and sections on which the presentation holds; their union is the set.
pub fn slices_of(pres: &Presentation, decomp: &Decomposition) -> Result<Vec<Slice>> {
    if pres.vars() != decomp.vars {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} variables",
            pres.vars(),
            decomp.vars
        )));
    }
    if pres.polys().iter().any(|p| !decomp.polys.contains(p)) {
        return Err(Error::Invalid(
            "decomposition was not built from every presentation polynomial".into(),
        ));
    }
    let iv = decomp.interval();
    let alg = |q: &Rational| AlgebraicNumber::from_rational(q.clone());
    let mut out = Vec::new();
    let mut keep = |base: &BaseCell1D, fiber: FiberPart, signs: Vec<i8>| {
        if pres.satisfied_by(&signs) {
            out.push(Slice {
                base: base.clone(),
                fiber,
                signs,
                box_lo: iv.0.clone(),
                box_hi: iv.1.clone(),
            });
        }
    };
    for col in &decomp.columns {
        if decomp.vars == 1 {
            let pt = match &col.base {
                BaseCell1D::Open { .. } => alg(&col.base.sample().expect("open cell")),
                BaseCell1D::Point { at } => at.clone(),
            };
            let s = signs_at(pres, &[pt])?;
            keep(&col.base, FiberPart::Whole, s);
            continue;
        }
        let (y, values): (AlgebraicNumber, Vec<AlgebraicNumber>) = match &col.base {
            BaseCell1D::Open { .. } => {
                let yq = col.base.sample().expect("open cell");
                let vals = col
                    .bounds
                    .iter()
                    .map(|b| b.value_at(&yq, &iv))
                    .collect::<Result<Vec<_>>>()?;
                (alg(&yq), vals)
            }
            BaseCell1D::Point { at } => {
                let vals = col
                    .bounds
                    .iter()
                    .map(|b| match b {
                        Bound::Point { at } => at.clone(),
                        _ => unreachable!("point columns hold fiber points"),
                    })
                    .collect();
                (at.clone(), vals)
            }
        };
        let q = values.len();
        for i in 0..=q {
            let lower = if i == 0 {
                Bound::BoxBottom
            } else {
                col.bounds[i - 1].clone()
            };
            let upper = if i == q {
                Bound::BoxTop
            } else {
                col.bounds[i].clone()
            };
            let lv = if i == 0 {
                alg(&iv.0)
            } else {
                values[i - 1].clone()
            };
            let uv = if i == q {
                alg(&iv.1)
            } else {
                values[i].clone()
            };
            let x = rational_between(&lv, &uv);
            let s = signs_at(pres, &[alg(&x), y.clone()])?;
            keep(&col.base, FiberPart::Sector { lower, upper }, s);
            if i < q {
                let s = signs_at(pres, &[values[i].clone(), y.clone()])?;
                keep(
                    &col.base,
                    FiberPart::Section {
                        graph: col.bounds[i].clone(),
                    },
                    s,
                );
            }
        }
    }
    Ok(out)
}

/// Top dimension among the slices of the set (0 for the empty set).
pub fn max_dimension(pres: &Presentation) -> Result<usize> {
    if pres.vars() > 2 {
        return Err(Error::Unsupported(format!(
            "maximum dimension in {} variables",
            pres.vars()
        )));
    }
    let d = decompose(pres)?;
    Ok(slices_of(pres, &d)?
        .iter()
        .map(Slice::dim)
        .max()
        .unwrap_or(0))
}
