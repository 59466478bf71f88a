//! Chart expressions: a small DAG of Nash function constructors.
//!
//! Every expression lives in a context of numbered variables `x_0, x_1, ...`.
//! A branch node carries its own fiber expression whose context is
//! `(z, p_1, ..., p_k)`: the unknown first, then the parameters.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kernel::{
    fmt_rational, parse_poly, parse_rational, AlgebraicNumber, MultiPoly, Rational,
};

/// Polynomial folding stops above these sizes.
const FOLD_MAX_DEGREE: u32 = 32;
const FOLD_MAX_TERMS: usize = 400;

#[derive(Clone, Debug)]
pub enum Num {
    Rational(Rational),
    Algebraic(AlgebraicNumber),
}

impl Num {
    pub fn from_algebraic(a: AlgebraicNumber) -> Num {
        match a.as_rational() {
            Some(q) => Num::Rational(q.clone()),
            None => Num::Algebraic(a),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Num::Rational(q) => Some(q),
            Num::Algebraic(a) => a.as_rational(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Rational(q) => crate::kernel::rational_to_f64(q),
            Num::Algebraic(a) => a.to_f64(),
        }
    }

    fn same(&self, o: &Num) -> bool {
        match (self, o) {
            (Num::Rational(a), Num::Rational(b)) => a == b,
            (Num::Algebraic(a), Num::Algebraic(b)) => {
                a.poly() == b.poly() && a.lo() == b.lo() && a.hi() == b.hi()
            }
            _ => false,
        }
    }
}

/// The `index`-th root (from 0, increasing) of `fiber(z, params)` in the
/// open interval `(lo, hi)`. `count`, when known, is the number of roots there.
#[derive(Clone, Debug)]
pub struct BranchNode {
    pub fiber: ChartExpr,
    pub params: Vec<ChartExpr>,
    pub lo: ChartExpr,
    pub hi: ChartExpr,
    pub index: usize,
    pub count: Option<usize>,
}

#[derive(Debug)]
pub enum Node {
    Var(usize),
    Const(Num),
    /// `Σ coeffs[i] x_i + offset`.
    Affine {
        coeffs: Vec<Rational>,
        offset: Rational,
    },
    /// `poly(args)`, with `poly.nvars() == args.len()`.
    Poly {
        poly: MultiPoly,
        args: Vec<ChartExpr>,
    },
    Square(ChartExpr),
    Branch(BranchNode),
    /// `t u + (1 - t) v`.
    Blend {
        t: ChartExpr,
        u: ChartExpr,
        v: ChartExpr,
    },
    /// `inner(args)`; `inner` lives in a context of `args.len()` variables.
    Compose {
        inner: ChartExpr,
        args: Vec<ChartExpr>,
    },
    /// `D^beta inner`, in the same context as `inner`.
    Deriv {
        inner: ChartExpr,
        beta: Vec<u32>,
    },
}

#[derive(Clone, Debug)]
pub struct ChartExpr(Arc<Node>);

type Memo<T> = HashMap<*const Node, T>;

fn pad(p: &MultiPoly, n: usize) -> MultiPoly {
    if p.nvars() == n {
        return p.clone();
    }
    let map: Vec<usize> = (0..p.nvars()).collect();
    p.remap(n, &map)
}

impl ChartExpr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn raw(n: Node) -> ChartExpr {
        ChartExpr(Arc::new(n))
    }

    fn key(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    pub fn ptr_eq(&self, o: &ChartExpr) -> bool {
        Arc::ptr_eq(&self.0, &o.0)
    }

    pub fn var(i: usize) -> ChartExpr {
        Self::raw(Node::Var(i))
    }

    pub fn vars(m: usize) -> Vec<ChartExpr> {
        (0..m).map(Self::var).collect()
    }

    pub fn constant(q: Rational) -> ChartExpr {
        Self::raw(Node::Const(Num::Rational(q)))
    }

    pub fn num(n: Num) -> ChartExpr {
        match n {
            Num::Algebraic(a) => Self::raw(Node::Const(Num::from_algebraic(a))),
            n => Self::raw(Node::Const(n)),
        }
    }

    pub fn algebraic(a: AlgebraicNumber) -> ChartExpr {
        Self::num(Num::Algebraic(a))
    }

    /// Expression for a polynomial in the context variables, in the
    /// simplest node form.
    pub fn from_poly(p: &MultiPoly) -> ChartExpr {
        if p.is_constant() {
            return Self::constant(p.constant_term());
        }
        let m = p.used_vars().into_iter().max().map(|v| v + 1).unwrap_or(0);
        let p = if m < p.nvars() {
            let map: Vec<usize> = (0..p.nvars()).map(|i| i.min(m.saturating_sub(1))).collect();
            p.remap(m, &map)
        } else {
            p.clone()
        };
        match p.total_degree() {
            0 => Self::constant(p.constant_term()),
            1 => {
                for i in 0..m {
                    if p == MultiPoly::var(m, i) {
                        return Self::var(i);
                    }
                }
                let mut coeffs = vec![Rational::from_integer(0.into()); m];
                for (e, c) in p.terms() {
                    if let Some(i) = e.iter().position(|&k| k == 1) {
                        coeffs[i] = c.clone();
                    }
                }
                Self::raw(Node::Affine {
                    coeffs,
                    offset: p.constant_term(),
                })
            }
            _ => Self::raw(Node::Poly {
                poly: p,
                args: Self::vars(m),
            }),
        }
    }

    /// The polynomial this node denotes in the context variables, if it is
    /// already in folded form.
    pub fn as_poly(&self) -> Option<MultiPoly> {
        match self.node() {
            Node::Var(i) => Some(MultiPoly::var(i + 1, *i)),
            Node::Const(Num::Rational(q)) => Some(MultiPoly::constant(0, q.clone())),
            Node::Affine { coeffs, offset } => {
                let m = coeffs.len();
                let mut p = MultiPoly::constant(m, offset.clone());
                for (i, c) in coeffs.iter().enumerate() {
                    p = &p + &MultiPoly::var(m, i).scale(c);
                }
                Some(p)
            }
            Node::Poly { poly, args } => {
                let ok = args
                    .iter()
                    .enumerate()
                    .all(|(i, a)| matches!(a.node(), Node::Var(j) if *j == i));
                ok.then(|| poly.clone())
            }
            _ => None,
        }
    }

    fn fold(
        polys: &[MultiPoly],
        build: impl FnOnce(&[MultiPoly]) -> Option<MultiPoly>,
    ) -> Option<ChartExpr> {
        let m = polys.iter().map(MultiPoly::nvars).max().unwrap_or(0);
        let padded: Vec<MultiPoly> = polys.iter().map(|p| pad(p, m)).collect();
        let p = build(&padded)?;
        (p.total_degree() <= FOLD_MAX_DEGREE && p.num_terms() <= FOLD_MAX_TERMS)
            .then(|| Self::from_poly(&p))
    }

    pub fn affine(coeffs: Vec<Rational>, offset: Rational) -> ChartExpr {
        let m = coeffs.len();
        let mut p = MultiPoly::constant(m, offset);
        for (i, c) in coeffs.iter().enumerate() {
            p = &p + &MultiPoly::var(m, i).scale(c);
        }
        Self::from_poly(&p)
    }

    pub fn poly(p: MultiPoly, args: Vec<ChartExpr>) -> Result<ChartExpr> {
        if p.nvars() != args.len() {
            return Err(Error::LengthMismatch(p.nvars(), args.len()));
        }
        if p.is_constant() {
            return Ok(Self::constant(p.constant_term()));
        }
        let folded: Option<Vec<MultiPoly>> = args.iter().map(ChartExpr::as_poly).collect();
        if let Some(a) = folded {
            if let Some(e) = Self::fold(&a, |a| p.compose(a).ok()) {
                return Ok(e);
            }
        }
        Ok(Self::raw(Node::Poly { poly: p, args }))
    }

    pub fn square(e: ChartExpr) -> ChartExpr {
        if let Some(p) = e.as_poly() {
            if let Some(f) = Self::fold(&[p], |a| Some(&a[0] * &a[0])) {
                return f;
            }
        }
        Self::raw(Node::Square(e))
    }

    pub fn blend(t: ChartExpr, u: ChartExpr, v: ChartExpr) -> ChartExpr {
        if let (Some(a), Some(b), Some(c)) = (t.as_poly(), u.as_poly(), v.as_poly()) {
            if let Some(f) = Self::fold(&[a, b, c], |x| {
                let one = MultiPoly::one(x[0].nvars());
                Some(&(&x[0] * &x[1]) + &(&(&one - &x[0]) * &x[2]))
            }) {
                return f;
            }
        }
        Self::raw(Node::Blend { t, u, v })
    }

    /// Root branch; a fiber that is linear in `z` with constant slope folds
    /// to a polynomial in the parameters.
    pub fn branch(b: BranchNode) -> Result<ChartExpr> {
        if let Some(count) = b.count {
            if b.index >= count {
                return Err(Error::Invalid(format!(
                    "branch index {} with {count} roots",
                    b.index
                )));
            }
        }
        if let Some(p) = b.fiber.as_poly() {
            let k = b.params.len();
            if p.nvars() > k + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "fiber uses {} variables, context has {}",
                    p.nvars(),
                    k + 1
                )));
            }
            let p = pad(&p, k + 1);
            if p.degree_in(0) == 0 {
                return Err(Error::DegenerateCell(
                    "branch fiber does not involve the unknown".into(),
                ));
            }
            if p.degree_in(0) == 1 {
                let cs = p.coeffs_in(0);
                if cs[1].is_constant() {
                    let slope = cs[1].constant_term();
                    let map: Vec<usize> = (0..=k).map(|i| i.saturating_sub(1)).collect();
                    let rest = cs[0].remap(k.max(1), &map);
                    let rest = if k == 0 {
                        MultiPoly::constant(0, rest.constant_term())
                    } else {
                        rest
                    };
                    let root = rest.scale(&(-Rational::from_integer(1.into()) / slope));
                    return Self::poly(root, b.params.clone());
                }
            }
        }
        Ok(Self::raw(Node::Branch(b)))
    }

    /// `inner(args)`: substitution, except that derivative nodes stay wrapped.
    pub fn compose(inner: &ChartExpr, args: &[ChartExpr]) -> Result<ChartExpr> {
        inner.substitute(args)
    }

    pub fn deriv(inner: ChartExpr, beta: Vec<u32>) -> ChartExpr {
        if beta.iter().all(|&b| b == 0) {
            return inner;
        }
        if let Some(p) = inner.as_poly() {
            let mut q = p;
            for (i, &b) in beta.iter().enumerate() {
                if i >= q.nvars() && b > 0 {
                    return Self::constant(Rational::from_integer(0.into()));
                }
                for _ in 0..b {
                    q = q.derivative(i).expect("index checked");
                }
            }
            return Self::from_poly(&q);
        }
        Self::raw(Node::Deriv { inner, beta })
    }

    pub fn add(a: &ChartExpr, b: &ChartExpr) -> ChartExpr {
        Self::poly(
            &MultiPoly::var(2, 0) + &MultiPoly::var(2, 1),
            vec![a.clone(), b.clone()],
        )
        .expect("two arguments")
    }

    pub fn sub(a: &ChartExpr, b: &ChartExpr) -> ChartExpr {
        Self::poly(
            &MultiPoly::var(2, 0) - &MultiPoly::var(2, 1),
            vec![a.clone(), b.clone()],
        )
        .expect("two arguments")
    }

    pub fn mul(a: &ChartExpr, b: &ChartExpr) -> ChartExpr {
        Self::poly(
            &MultiPoly::var(2, 0) * &MultiPoly::var(2, 1),
            vec![a.clone(), b.clone()],
        )
        .expect("two arguments")
    }

    /// Replace the context variables by `args`.
    pub fn substitute(&self, args: &[ChartExpr]) -> Result<ChartExpr> {
        let mut memo = Memo::new();
        self.subst_rec(args, &mut memo)
    }

    fn subst_rec(&self, args: &[ChartExpr], memo: &mut Memo<ChartExpr>) -> Result<ChartExpr> {
        if let Some(e) = memo.get(&self.key()) {
            return Ok(e.clone());
        }
        let mut go = |e: &ChartExpr| e.subst_rec(args, memo);
        let out = match self.node() {
            Node::Var(i) => args.get(*i).cloned().ok_or(Error::InvalidVariable {
                index: *i,
                nvars: args.len(),
            })?,
            Node::Const(_) => self.clone(),
            Node::Affine { coeffs, .. } => {
                let p = self.as_poly().expect("affine is polynomial");
                Self::poly(
                    pad(&p, coeffs.len()),
                    args.get(..coeffs.len())
                        .ok_or(Error::LengthMismatch(coeffs.len(), args.len()))?
                        .to_vec(),
                )?
            }
            Node::Poly { poly, args: a } => {
                let a = a.iter().map(&mut go).collect::<Result<Vec<_>>>()?;
                Self::poly(poly.clone(), a)?
            }
            Node::Square(a) => Self::square(go(a)?),
            Node::Blend { t, u, v } => {
                let (t, u, v) = (go(t)?, go(u)?, go(v)?);
                Self::blend(t, u, v)
            }
            Node::Branch(b) => {
                let params = b.params.iter().map(&mut go).collect::<Result<Vec<_>>>()?;
                let lo = go(&b.lo)?;
                let hi = go(&b.hi)?;
                Self::branch(BranchNode {
                    fiber: b.fiber.clone(),
                    params,
                    lo,
                    hi,
                    index: b.index,
                    count: b.count,
                })?
            }
            Node::Compose { inner, args: a } => {
                let a = a.iter().map(&mut go).collect::<Result<Vec<_>>>()?;
                Self::raw(Node::Compose {
                    inner: inner.clone(),
                    args: a,
                })
            }
            Node::Deriv { .. } => {
                let identity = args
                    .iter()
                    .enumerate()
                    .all(|(i, a)| matches!(a.node(), Node::Var(j) if *j == i));
                if identity {
                    self.clone()
                } else {
                    Self::raw(Node::Compose {
                        inner: self.clone(),
                        args: args.to_vec(),
                    })
                }
            }
        };
        memo.insert(self.key(), out.clone());
        Ok(out)
    }

    /// Degree surrogate used for reporting chart complexity; constant
    /// subexpressions count as degree 0, and the result is at least 1.
    pub fn degree(&self) -> u32 {
        self.degree_rec(&mut Memo::new()).max(1)
    }

    fn degree_rec(&self, memo: &mut Memo<u32>) -> u32 {
        if let Some(&d) = memo.get(&self.key()) {
            return d;
        }
        let max_of = |es: &[ChartExpr], memo: &mut Memo<u32>| {
            es.iter().map(|e| e.degree_rec(memo)).max().unwrap_or(0)
        };
        let d = match self.node() {
            Node::Var(_) => 1,
            Node::Const(_) => 0,
            Node::Affine { coeffs, .. } => u32::from(
                coeffs
                    .iter()
                    .any(|c| c != &Rational::from_integer(0.into())),
            ),
            Node::Poly { poly, args } => poly.total_degree() * max_of(args, memo),
            Node::Square(a) => 2 * a.degree_rec(memo),
            Node::Branch(b) => b.fiber.degree_rec(&mut Memo::new()) * max_of(&b.params, memo),
            Node::Blend { t, u, v } => t.degree_rec(memo) + max_of(&[u.clone(), v.clone()], memo),
            Node::Compose { inner, args } => {
                inner.degree_rec(&mut Memo::new()) * max_of(args, memo)
            }
            Node::Deriv { inner, .. } => inner.degree_rec(memo),
        };
        memo.insert(self.key(), d);
        d
    }

    /// Context variables the expression depends on (structurally).
    pub fn free_vars(&self) -> BTreeSet<usize> {
        let mut memo = Memo::new();
        self.free_rec(&mut memo)
    }

    fn free_rec(&self, memo: &mut Memo<BTreeSet<usize>>) -> BTreeSet<usize> {
        if let Some(s) = memo.get(&self.key()) {
            return s.clone();
        }
        let union = |es: &[&ChartExpr], memo: &mut Memo<BTreeSet<usize>>| {
            let mut s = BTreeSet::new();
            for e in es {
                s.extend(e.free_rec(memo));
            }
            s
        };
        let s = match self.node() {
            Node::Var(i) => BTreeSet::from([*i]),
            Node::Const(_) => BTreeSet::new(),
            Node::Affine { coeffs, .. } => coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| *c != &Rational::from_integer(0.into()))
                .map(|(i, _)| i)
                .collect(),
            Node::Poly { poly, args } => {
                let used = poly.used_vars();
                let es: Vec<&ChartExpr> = used.iter().map(|&i| &args[i]).collect();
                union(&es, memo)
            }
            Node::Square(a) => a.free_rec(memo),
            Node::Blend { t, u, v } => union(&[t, u, v], memo),
            Node::Branch(b) => {
                let mut es: Vec<&ChartExpr> = b.params.iter().collect();
                es.push(&b.lo);
                es.push(&b.hi);
                union(&es, memo)
            }
            Node::Compose { inner, args } => {
                let used = inner.free_vars();
                let es: Vec<&ChartExpr> = used.iter().filter_map(|&i| args.get(i)).collect();
                union(&es, memo)
            }
            Node::Deriv { inner, .. } => inner.free_rec(memo),
        };
        memo.insert(self.key(), s.clone());
        s
    }

    /// Number of distinct nodes reachable from this expression.
    pub fn size(&self) -> usize {
        let mut t = NodeTable::default();
        t.add(self);
        t.nodes.len()
    }
}

impl PartialEq for ChartExpr {
    fn eq(&self, o: &ChartExpr) -> bool {
        if self.ptr_eq(o) {
            return true;
        }
        let all = |a: &[ChartExpr], b: &[ChartExpr]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y)
        };
        match (self.node(), o.node()) {
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Const(a), Node::Const(b)) => a.same(b),
            (
                Node::Affine {
                    coeffs: a,
                    offset: x,
                },
                Node::Affine {
                    coeffs: b,
                    offset: y,
                },
            ) => a == b && x == y,
            (Node::Poly { poly: p, args: a }, Node::Poly { poly: q, args: b }) => {
                p == q && all(a, b)
            }
            (Node::Square(a), Node::Square(b)) => a == b,
            (
                Node::Blend { t, u, v },
                Node::Blend {
                    t: t2,
                    u: u2,
                    v: v2,
                },
            ) => t == t2 && u == u2 && v == v2,
            (Node::Branch(a), Node::Branch(b)) => {
                a.fiber == b.fiber
                    && all(&a.params, &b.params)
                    && a.lo == b.lo
                    && a.hi == b.hi
                    && a.index == b.index
                    && a.count == b.count
            }
            (Node::Compose { inner: a, args: x }, Node::Compose { inner: b, args: y }) => {
                a == b && all(x, y)
            }
            (Node::Deriv { inner: a, beta: x }, Node::Deriv { inner: b, beta: y }) => {
                a == b && x == y
            }
            _ => false,
        }
    }
}

/// Flattened node list shared by several expressions.
#[derive(Default)]
pub struct NodeTable {
    ids: HashMap<*const Node, usize>,
    nodes: Vec<Value>,
}

impl NodeTable {
    pub fn into_nodes(self) -> Vec<Value> {
        self.nodes
    }

    /// Index of `e` in the table, adding it and its children as needed.
    pub fn add(&mut self, e: &ChartExpr) -> usize {
        if let Some(&i) = self.ids.get(&e.key()) {
            return i;
        }
        let v = match e.node() {
            Node::Var(i) => json!({"op": "var", "index": i}),
            Node::Const(Num::Rational(q)) => json!({"op": "const", "value": fmt_rational(q)}),
            Node::Const(Num::Algebraic(a)) => json!({"op": "const", "algebraic": a}),
            Node::Affine { coeffs, offset } => json!({
                "op": "affine",
                "coeffs": coeffs.iter().map(fmt_rational).collect::<Vec<_>>(),
                "offset": fmt_rational(offset),
            }),
            Node::Poly { poly, args } => {
                let a: Vec<usize> = args.iter().map(|x| self.add(x)).collect();
                json!({"op": "poly", "poly": poly.to_text(), "nvars": poly.nvars(), "args": a})
            }
            Node::Square(a) => {
                let a = self.add(a);
                json!({"op": "square", "arg": a})
            }
            Node::Branch(b) => {
                let fiber = self.add(&b.fiber);
                let params: Vec<usize> = b.params.iter().map(|x| self.add(x)).collect();
                let lo = self.add(&b.lo);
                let hi = self.add(&b.hi);
                json!({"op": "branch", "fiber": fiber, "params": params, "lo": lo, "hi": hi, "index": b.index, "count": b.count})
            }
            Node::Blend { t, u, v } => {
                let (t, u, v) = (self.add(t), self.add(u), self.add(v));
                json!({"op": "blend", "t": t, "u": u, "v": v})
            }
            Node::Compose { inner, args } => {
                let inner = self.add(inner);
                let a: Vec<usize> = args.iter().map(|x| self.add(x)).collect();
                json!({"op": "compose", "inner": inner, "args": a})
            }
            Node::Deriv { inner, beta } => {
                let inner = self.add(inner);
                json!({"op": "deriv", "inner": inner, "beta": beta})
            }
        };
        self.nodes.push(v);
        let id = self.nodes.len() - 1;
        self.ids.insert(e.key(), id);
        id
    }
}

/// Serialize expressions as a shared node table: `{"nodes": [...], "roots": [...]}`.
pub fn exprs_to_json(exprs: &[ChartExpr]) -> Value {
    let mut t = NodeTable::default();
    let roots: Vec<usize> = exprs.iter().map(|e| t.add(e)).collect();
    json!({"nodes": t.nodes, "roots": roots})
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse {
        pos: 0,
        msg: msg.into(),
    }
}

pub fn exprs_from_json(v: &Value) -> Result<Vec<ChartExpr>> {
    let nodes = v
        .get("nodes")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing node table"))?;
    let built = build_nodes(nodes)?;
    let roots = v
        .get("roots")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing roots"))?;
    roots.iter().map(|r| node_ref(&built, r)).collect()
}

/// Look up a node index produced by [`build_nodes`].
pub fn node_ref(built: &[ChartExpr], r: &Value) -> Result<ChartExpr> {
    let i = r
        .as_u64()
        .ok_or_else(|| bad("node reference is not an index"))? as usize;
    built
        .get(i)
        .cloned()
        .ok_or_else(|| bad(format!("node {i} out of range")))
}

/// Rebuild every node of a table, in order, without simplifying.
pub fn build_nodes(nodes: &[Value]) -> Result<Vec<ChartExpr>> {
    let mut built: Vec<ChartExpr> = Vec::with_capacity(nodes.len());
    let field = |n: &Value, k: &str| {
        n.get(k)
            .cloned()
            .ok_or_else(|| bad(format!("node lacks {k:?}")))
    };
    for n in nodes {
        let get = |id: &Value| -> Result<ChartExpr> {
            let i = id
                .as_u64()
                .ok_or_else(|| bad("node reference is not an index"))? as usize;
            built
                .get(i)
                .cloned()
                .ok_or_else(|| bad(format!("forward node reference {i}")))
        };
        let list = |k: &str| -> Result<Vec<ChartExpr>> {
            field(n, k)?
                .as_array()
                .ok_or_else(|| bad(format!("{k:?} is not a list")))?
                .iter()
                .map(get)
                .collect()
        };
        let text = |k: &str| -> Result<String> {
            field(n, k)?
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| bad(format!("{k:?} is not a string")))
        };
        let uint = |k: &str| -> Result<usize> {
            field(n, k)?
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| bad(format!("{k:?} is not an integer")))
        };
        let op = text("op")?;
        let node = match op.as_str() {
            "var" => Node::Var(uint("index")?),
            "const" => match n.get("algebraic") {
                Some(a) => Node::Const(Num::Algebraic(
                    serde_json::from_value(a.clone()).map_err(|e| bad(e.to_string()))?,
                )),
                None => Node::Const(Num::Rational(parse_rational(&text("value")?)?)),
            },
            "affine" => {
                let coeffs = field(n, "coeffs")?
                    .as_array()
                    .ok_or_else(|| bad("coeffs"))?
                    .iter()
                    .map(|c| {
                        c.as_str()
                            .ok_or_else(|| bad("coefficient"))
                            .and_then(parse_rational)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Node::Affine {
                    coeffs,
                    offset: parse_rational(&text("offset")?)?,
                }
            }
            "poly" => {
                let nv = uint("nvars")?;
                let poly = parse_poly(&text("poly")?, nv)?;
                let args = list("args")?;
                if args.len() != nv {
                    return Err(Error::LengthMismatch(nv, args.len()));
                }
                Node::Poly { poly, args }
            }
            "square" => Node::Square(get(&field(n, "arg")?)?),
            "branch" => {
                let count = match n.get("count") {
                    Some(Value::Null) | None => None,
                    Some(c) => Some(c.as_u64().ok_or_else(|| bad("count"))? as usize),
                };
                Node::Branch(BranchNode {
                    fiber: get(&field(n, "fiber")?)?,
                    params: list("params")?,
                    lo: get(&field(n, "lo")?)?,
                    hi: get(&field(n, "hi")?)?,
                    index: uint("index")?,
                    count,
                })
            }
            "blend" => Node::Blend {
                t: get(&field(n, "t")?)?,
                u: get(&field(n, "u")?)?,
                v: get(&field(n, "v")?)?,
            },
            "compose" => Node::Compose {
                inner: get(&field(n, "inner")?)?,
                args: list("args")?,
            },
            "deriv" => {
                let beta = field(n, "beta")?
                    .as_array()
                    .ok_or_else(|| bad("beta"))?
                    .iter()
                    .map(|b| {
                        b.as_u64()
                            .map(|x| x as u32)
                            .ok_or_else(|| bad("beta entry"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Node::Deriv {
                    inner: get(&field(n, "inner")?)?,
                    beta,
                }
            }
            other => return Err(bad(format!("unknown node kind {other:?}"))),
        };
        built.push(ChartExpr::raw(node));
    }
    Ok(built)
}
