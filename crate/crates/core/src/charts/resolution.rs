use serde_json::{json, Value};

use super::chart::TriangularChart;
use super::expr::{build_nodes, node_ref, ChartExpr, NodeTable};
use super::multiindex::MultiIndex;
use crate::error::{Error, Result};
use crate::kernel::{fmt_rational, parse_rational, Rational};
use crate::semialg::Presentation;

/// Where the charts are supposed to land.
#[derive(Clone, Debug)]
pub enum Domain {
    Interval { lo: Rational, hi: Rational },
    Set(Presentation),
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Set(p) => p.vars(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Domain::Interval { lo, hi } => {
                json!({"kind": "interval", "lo": fmt_rational(lo), "hi": fmt_rational(hi)})
            }
            Domain::Set(p) => json!({"kind": "set", "presentation": p.to_json()}),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        let s = |k: &str| {
            v.get(k).and_then(Value::as_str).ok_or(Error::Parse {
                pos: 0,
                msg: format!("domain lacks {k:?}"),
            })
        };
        match s("kind")? {
            "interval" => Ok(Domain::Interval {
                lo: parse_rational(s("lo")?)?,
                hi: parse_rational(s("hi")?)?,
            }),
            "set" => Presentation::from_json(
                &v.get("presentation")
                    .cloned()
                    .unwrap_or(Value::Null)
                    .to_string(),
            )
            .map(Domain::Set),
            k => Err(Error::Parse {
                pos: 0,
                msg: format!("unknown domain kind {k:?}"),
            }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChartRecord {
    pub chart: TriangularChart,
    /// Construction steps, outermost last: "cell", "c1-split", "inverse",
    /// "square-subst", "argmax", "rescale".
    pub provenance: Vec<String>,
    /// Label of the slice or piece the chart came from.
    pub source: String,
    /// Norm estimate of the chart and the pulled-back functions.
    pub norm: Option<f64>,
    pub converged: Option<bool>,
}

/// A chart on which `function ∘ chart` equals the explicit `target`.
#[derive(Clone, Debug)]
pub struct InverseRecord {
    pub chart: TriangularChart,
    pub function: ChartExpr,
    pub target: ChartExpr,
}

/// A one-variable piece `G` on which `|G^(order)|` decreases, prepared for
/// the substitution `x -> x^2`.
#[derive(Clone, Debug)]
pub struct EstimateRecord {
    pub piece: ChartExpr,
    pub order: u32,
}

#[derive(Clone, Debug)]
pub struct Resolution {
    pub ambient: usize,
    pub alpha: MultiIndex,
    pub box_n: u32,
    /// Distance within which the chart images must reach every target point.
    pub density: f64,
    pub domain: Domain,
    /// Functions `f_j` in the ambient variables whose pullbacks are controlled.
    pub functions: Vec<ChartExpr>,
    pub charts: Vec<ChartRecord>,
    pub inverses: Vec<InverseRecord>,
    pub estimates: Vec<EstimateRecord>,
}

/// The multi-index a chart of dimension `l` is measured with: `α` itself
/// for full-dimensional charts, all derivatives up to `|α|` otherwise.
pub fn alpha_for(alpha: &MultiIndex, l: usize) -> MultiIndex {
    if l == alpha.dim() {
        alpha.clone()
    } else {
        MultiIndex::top(l, alpha.weight())
    }
}

impl Resolution {
    pub fn count(&self) -> usize {
        self.charts.len()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.charts.iter().map(|c| c.chart.degree()).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Chart components followed by the pulled-back functions.
    pub fn controlled(&self, chart: &TriangularChart) -> Result<Vec<ChartExpr>> {
        let mut out = chart.components().to_vec();
        for f in &self.functions {
            out.push(chart.pullback(f)?);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let mut t = NodeTable::default();
        let functions: Vec<usize> = self.functions.iter().map(|f| t.add(f)).collect();
        let charts: Vec<Value> = self
            .charts
            .iter()
            .map(|c| {
                let mut v = c.chart.to_json_with(&mut t);
                v["provenance"] = json!(c.provenance);
                v["source"] = json!(c.source);
                v["degree"] = json!(c.chart.degree());
                v["norm"] = json!(c.norm);
                v["converged"] = json!(c.converged);
                v
            })
            .collect();
        let inverses: Vec<Value> = self
            .inverses
            .iter()
            .map(|r| json!({"chart": r.chart.to_json_with(&mut t), "function": t.add(&r.function), "target": t.add(&r.target)}))
            .collect();
        let estimates: Vec<Value> = self
            .estimates
            .iter()
            .map(|r| json!({"piece": t.add(&r.piece), "order": r.order}))
            .collect();
        json!({
            "ambient": self.ambient,
            "alpha": self.alpha,
            "box_n": self.box_n,
            "density": self.density,
            "domain": self.domain.to_json(),
            "functions": functions,
            "charts": charts,
            "chart_count": self.charts.len(),
            "inverses": inverses,
            "estimates": estimates,
            "nodes": t.into_nodes(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse {
            pos: 0,
            msg: m.to_string(),
        };
        let nodes = v
            .get("nodes")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing node table"))?;
        let built = build_nodes(nodes)?;
        let arr = |k: &str| {
            v.get(k)
                .and_then(Value::as_array)
                .cloned()
                .ok_or_else(|| bad(&format!("missing {k:?}")))
        };
        let alpha: MultiIndex = serde_json::from_value(
            v.get("alpha")
                .cloned()
                .ok_or_else(|| bad("missing alpha"))?,
        )
        .map_err(|e| bad(&e.to_string()))?;
        let functions = arr("functions")?
            .iter()
            .map(|r| node_ref(&built, r))
            .collect::<Result<Vec<_>>>()?;
        let charts = arr("charts")?
            .iter()
            .map(|c| {
                Ok(ChartRecord {
                    chart: TriangularChart::from_json_with(c, &built)?,
                    provenance: serde_json::from_value(
                        c.get("provenance").cloned().unwrap_or(json!([])),
                    )
                    .map_err(|e| bad(&e.to_string()))?,
                    source: c
                        .get("source")
                        .and_then(Value::as_str)
                        .unwrap_or("")
                        .to_string(),
                    norm: c.get("norm").and_then(Value::as_f64),
                    converged: c.get("converged").and_then(Value::as_bool),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let inverses = arr("inverses")?
            .iter()
            .map(|r| {
                Ok(InverseRecord {
                    chart: TriangularChart::from_json_with(
                        r.get("chart").ok_or_else(|| bad("inverse lacks chart"))?,
                        &built,
                    )?,
                    function: node_ref(
                        &built,
                        r.get("function")
                            .ok_or_else(|| bad("inverse lacks function"))?,
                    )?,
                    target: node_ref(
                        &built,
                        r.get("target").ok_or_else(|| bad("inverse lacks target"))?,
                    )?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let estimates = arr("estimates")?
            .iter()
            .map(|r| {
                Ok(EstimateRecord {
                    piece: node_ref(
                        &built,
                        r.get("piece").ok_or_else(|| bad("estimate lacks piece"))?,
                    )?,
                    order: r
                        .get("order")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| bad("estimate lacks order"))?
                        as u32,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let ambient = v
            .get("ambient")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing ambient"))? as usize;
        if alpha.dim() != ambient {
            return Err(Error::LengthMismatch(alpha.dim(), ambient));
        }
        for c in &charts {
            if c.chart.d() != ambient {
                return Err(Error::DimensionMismatch(format!(
                    "chart into dimension {} inside a {ambient}-dimensional resolution",
                    c.chart.d()
                )));
            }
        }
        Ok(Resolution {
            ambient,
            alpha,
            box_n: v.get("box_n").and_then(Value::as_u64).unwrap_or(1) as u32,
            density: v.get("density").and_then(Value::as_f64).unwrap_or(0.0),
            domain: Domain::from_json(v.get("domain").ok_or_else(|| bad("missing domain"))?)?,
            functions,
            charts,
            inverses,
            estimates,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{parse_poly, rat};

    #[test]
    fn json_round_trip() {
        let f = ChartExpr::from_poly(&parse_poly("x1^2", 1).unwrap());
        let chart =
            TriangularChart::new(1, vec![ChartExpr::affine(vec![rat(1, 2)], rat(0, 1))]).unwrap();
        let r = Resolution {
            ambient: 1,
            alpha: MultiIndex(vec![2]),
            box_n: 1,
            density: 0.0,
            domain: Domain::Interval {
                lo: rat(0, 1),
                hi: rat(1, 1),
            },
            functions: vec![f.clone()],
            charts: vec![ChartRecord {
                chart: chart.clone(),
                provenance: vec!["c1-split".into()],
                source: "piece 0".into(),
                norm: Some(0.5),
                converged: Some(true),
            }],
            inverses: vec![InverseRecord {
                chart,
                function: f.clone(),
                target: f,
            }],
            estimates: vec![],
        };
        let js = r.to_json();
        let back = Resolution::from_json(&js).unwrap();
        assert_eq!(back.to_json(), js);
        assert_eq!(back.count(), 1);
        assert_eq!(alpha_for(&MultiIndex(vec![0, 2]), 1), MultiIndex(vec![2]));
    }
}
