use serde_json::{json, Value};

use super::eval::{jets_at, EvalScalar};
use super::expr::{build_nodes, node_ref, ChartExpr, NodeTable};
use super::multiindex::MultiIndex;
use crate::error::{Error, Result};
use crate::kernel::{rational_to_f64, Jet, Rational};

/// A map `(0,1)^l -> R^d` whose `i`-th component (from 0) depends only on
/// the variables `x_j` with `j >= i - (d - l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularChart {
    l: usize,
    comps: Vec<ChartExpr>,
}

impl TriangularChart {
    pub fn new(l: usize, comps: Vec<ChartExpr>) -> Result<Self> {
        let d = comps.len();
        if l > d {
            return Err(Error::DimensionMismatch(format!(
                "chart from dimension {l} into dimension {d}"
            )));
        }
        for (i, c) in comps.iter().enumerate() {
            let first = (i + l).saturating_sub(d);
            if let Some(&v) = c.free_vars().iter().find(|&&v| v < first || v >= l) {
                return Err(Error::Invalid(format!(
                    "component {i} depends on x{} and is not triangular",
                    v + 1
                )));
            }
        }
        Ok(TriangularChart { l, comps })
    }

    pub fn identity(d: usize) -> Self {
        TriangularChart {
            l: d,
            comps: ChartExpr::vars(d),
        }
    }

    /// `x_i -> lo_i + (hi_i - lo_i) x_i`.
    pub fn affine_box(lo: &[Rational], hi: &[Rational]) -> Self {
        let d = lo.len();
        let comps = (0..d)
            .map(|i| {
                let mut c = vec![Rational::from_integer(0.into()); d];
                c[i] = &hi[i] - &lo[i];
                ChartExpr::affine(c, lo[i].clone())
            })
            .collect();
        TriangularChart { l: d, comps }
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn d(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[ChartExpr] {
        &self.comps
    }

    pub fn degree(&self) -> u32 {
        self.comps.iter().map(ChartExpr::degree).max().unwrap_or(1)
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_len(point.len())?;
        super::eval::eval_many_f64(&self.comps, point)
    }

    pub fn jets<S: EvalScalar>(&self, point: &[S], order: u32) -> Result<Vec<Jet<S>>> {
        self.check_len(point.len())?;
        jets_at(&self.comps, point, order)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.l {
            return Err(Error::LengthMismatch(n, self.l));
        }
        Ok(())
    }

    /// Components of `f_j ∘ self` for functions in the ambient variables.
    pub fn pullback(&self, f: &ChartExpr) -> Result<ChartExpr> {
        f.substitute(&self.comps)
    }

    pub fn to_json_with(&self, table: &mut NodeTable) -> Value {
        let ids: Vec<usize> = self.comps.iter().map(|c| table.add(c)).collect();
        json!({"l": self.l, "d": self.d(), "components": ids})
    }

    pub fn from_json_with(v: &Value, built: &[ChartExpr]) -> Result<Self> {
        let bad = |m: &str| Error::Parse {
            pos: 0,
            msg: m.into(),
        };
        let l = v
            .get("l")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("chart lacks l"))? as usize;
        let comps = v
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("chart lacks components"))?
            .iter()
            .map(|r| node_ref(built, r))
            .collect::<Result<Vec<_>>>()?;
        if let Some(d) = v.get("d").and_then(Value::as_u64) {
            if d as usize != comps.len() {
                return Err(Error::LengthMismatch(d as usize, comps.len()));
            }
        }
        TriangularChart::new(l, comps)
    }

    pub fn to_json(&self) -> Value {
        let mut t = NodeTable::default();
        let mut v = self.to_json_with(&mut t);
        v["nodes"] = Value::Array(t.into_nodes());
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let nodes = v
            .get("nodes")
            .and_then(Value::as_array)
            .ok_or(Error::Parse {
                pos: 0,
                msg: "missing node table".into(),
            })?;
        let built = build_nodes(nodes)?;
        Self::from_json_with(v, &built)
    }
}

/// `outer ∘ inner`.
pub fn compose(outer: &TriangularChart, inner: &TriangularChart) -> Result<TriangularChart> {
    if outer.l != inner.d() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose a chart on dimension {} after one into dimension {}",
            outer.l,
            inner.d()
        )));
    }
    let comps = outer
        .comps
        .iter()
        .map(|c| c.substitute(&inner.comps))
        .collect::<Result<Vec<_>>>()?;
    TriangularChart::new(inner.l, comps)
}

/// Derivatives `D^β φ_i` for all `β ⪯ α`, exact when every node allows it.
#[derive(Clone, Debug)]
pub struct JetTable {
    pub betas: Vec<MultiIndex>,
    /// `values[i][k]` is `D^{betas[k]} φ_i`.
    pub values: Vec<Vec<f64>>,
    pub exact: Option<Vec<Vec<Rational>>>,
}

pub fn jet_eval(
    chart: &TriangularChart,
    point: &[Rational],
    alpha: &MultiIndex,
) -> Result<JetTable> {
    if alpha.dim() != chart.l() {
        return Err(Error::LengthMismatch(alpha.dim(), chart.l()));
    }
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    if point.iter().any(|x| x <= &zero || x >= &one) {
        return Err(Error::OutsideDomain(
            "jets are taken inside the open unit cube".into(),
        ));
    }
    let betas = alpha.down_set();
    let order = alpha.weight();
    let table = |jets: &[Jet<f64>]| -> Vec<Vec<f64>> {
        jets.iter()
            .map(|j| betas.iter().map(|b| j.derivative(b.as_slice())).collect())
            .collect()
    };
    match chart.jets::<Rational>(point, order) {
        Ok(jets) => {
            let exact: Vec<Vec<Rational>> = jets
                .iter()
                .map(|j| betas.iter().map(|b| j.derivative(b.as_slice())).collect())
                .collect();
            let values = exact
                .iter()
                .map(|row| row.iter().map(rational_to_f64).collect())
                .collect();
            Ok(JetTable {
                betas,
                values,
                exact: Some(exact),
            })
        }
        Err(Error::NotExact) => {
            let p: Vec<f64> = point.iter().map(rational_to_f64).collect();
            let jets = chart.jets::<f64>(&p, order)?;
            Ok(JetTable {
                values: table(&jets),
                betas,
                exact: None,
            })
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{int, parse_poly, rat};

    #[test]
    fn triangularity_is_checked() {
        let bad = TriangularChart::new(2, vec![ChartExpr::var(0), ChartExpr::var(0)]);
        assert!(bad.is_err());
        let ok = TriangularChart::new(2, vec![ChartExpr::var(0), ChartExpr::var(1)]);
        assert!(ok.is_ok());
        // a curve y -> (y, y)
        assert!(TriangularChart::new(1, vec![ChartExpr::var(0), ChartExpr::var(0)]).is_ok());
    }

    #[test]
    fn compose_simplifies() {
        let sq = TriangularChart::new(1, vec![ChartExpr::square(ChartExpr::var(0))]).unwrap();
        let id = TriangularChart::identity(1);
        assert_eq!(compose(&id, &sq).unwrap(), sq);
        let q = compose(&sq, &sq).unwrap();
        assert_eq!(
            q.components()[0].as_poly().unwrap(),
            parse_poly("x1^4", 1).unwrap()
        );
        assert_eq!(q.degree(), 4);
        let a = TriangularChart::affine_box(&[rat(1, 4)], &[rat(3, 4)]);
        let aa = compose(&a, &a).unwrap();
        assert!(matches!(
            aa.components()[0].node(),
            super::super::expr::Node::Affine { .. }
        ));
        assert_eq!(aa.eval_f64(&[0.0]).unwrap()[0], 0.375);
    }

    #[test]
    fn exact_jets_of_polynomial_chart() {
        let c = TriangularChart::new(
            2,
            vec![
                ChartExpr::from_poly(&parse_poly("x1*x2^2", 2).unwrap()),
                ChartExpr::var(1),
            ],
        )
        .unwrap();
        let t = jet_eval(&c, &[rat(1, 2), rat(1, 3)], &MultiIndex(vec![0, 2])).unwrap();
        let ex = t.exact.unwrap();
        let k = t.betas.iter().position(|b| b.0 == vec![1, 1]).unwrap();
        assert_eq!(ex[0][k], rat(2, 3));
        assert!(jet_eval(&c, &[int(0), rat(1, 3)], &MultiIndex(vec![0, 2])).is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = TriangularChart::new(
            1,
            vec![ChartExpr::square(ChartExpr::var(0)), ChartExpr::var(0)],
        )
        .unwrap();
        assert_eq!(TriangularChart::from_json(&c.to_json()).unwrap(), c);
    }
}
