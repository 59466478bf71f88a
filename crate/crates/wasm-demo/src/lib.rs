//! Browser bindings for the static demo page in `www/`. The plain functions
//! return JSON strings and also run natively; the `#[wasm_bindgen]` wrappers
//! turn errors into JavaScript exceptions.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use crparam::charts::{eval_f64, MultiIndex, Resolution, TriangularChart};
use crparam::engine::{
    cells_resolution, epsilon_resolution_set, resolve_interval_cr, Limits, NashInput,
};
use crparam::kernel::{parse_poly, rat};
use crparam::semialg::{Presentation, Rel, SignCondition};

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn region(poly: &str, rel: &str) -> Result<Presentation, String> {
    let rel = match rel.trim() {
        "<" => Rel::Lt,
        ">" => Rel::Gt,
        "=" => Rel::Eq,
        other => return Err(format!("unknown relation {other:?}; use <, > or =")),
    };
    let cond = SignCondition::new(parse_poly(poly, 2).map_err(err)?, rel).map_err(err)?;
    Presentation::new(2, 1, vec![vec![cond]]).map_err(err)
}

fn mid(i: usize, k: usize) -> f64 {
    (i as f64 + 0.5) / k as f64
}

/// Images of the parameter lines of a chart: `k` lines per axis.
fn chart_lines(c: &TriangularChart, k: usize) -> Result<Vec<Vec<[f64; 2]>>, String> {
    let at = |t: &[f64]| -> Result<[f64; 2], String> {
        let x = c.eval_f64(t).map_err(err)?;
        Ok([x[0], x[1]])
    };
    let steps = 32;
    let line = |f: &dyn Fn(f64) -> Vec<f64>| -> Result<Vec<[f64; 2]>, String> {
        (0..=steps).map(|j| at(&f(mid(j, steps + 1)))).collect()
    };
    match c.l() {
        0 => Ok(vec![vec![at(&[])?]]),
        1 => Ok(vec![line(&|s| vec![s])?]),
        _ => {
            let mut out = Vec::new();
            for i in 0..k {
                let u = mid(i, k);
                out.push(line(&|s| vec![u, s])?);
                out.push(line(&|s| vec![s, u])?);
            }
            Ok(out)
        }
    }
}

fn charts_json(res: &Resolution, k: usize) -> Result<Value, String> {
    let charts = res
        .charts
        .iter()
        .map(|c| {
            Ok(json!({
                "source": c.source,
                "provenance": c.provenance,
                "dim": c.chart.l(),
                "degree": c.chart.degree(),
                "norm": c.norm,
                "lines": chart_lines(&c.chart, k)?,
            }))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(json!({"chart_count": res.count(), "density": res.density, "charts": charts}))
}

/// Cell charts of `{poly rel 0}` in the unit square, one per slice.
pub fn decompose_region(poly: &str, rel: &str) -> Result<String, String> {
    let pres = region(poly, rel)?;
    let res = cells_resolution(&pres).map_err(err)?;
    Ok(charts_json(&res, 8)?.to_string())
}

/// Bounded-derivative charts of a one-variable polynomial on `(0, 1)`,
/// sampled as `(t, φ(t), f(φ(t)))`.
pub fn resolve_interval(poly: &str, r: u32) -> Result<String, String> {
    let p = parse_poly(poly, 1).map_err(err)?;
    let res = resolve_interval_cr(
        &NashInput::Poly(p),
        &rat(0, 1),
        &rat(1, 1),
        r,
        &Limits::default(),
    )
    .map_err(err)?;
    let f = &res.functions[0];
    let charts = res
        .charts
        .iter()
        .map(|c| {
            let phi = &c.chart.components()[0];
            let pts = (0..=64)
                .map(|j| {
                    let t = mid(j, 65);
                    let x = eval_f64(phi, &[t]).map_err(err)?;
                    Ok([t, x, eval_f64(f, &[x]).map_err(err)?])
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(json!({"provenance": c.provenance, "degree": c.chart.degree(), "norm": c.norm, "samples": pts}))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(json!({"chart_count": res.count(), "charts": charts}).to_string())
}

/// ε-resolution of `{poly rel 0}` restricted to the box `(1/n, 1 - 1/n)^2`.
pub fn resolve_region(poly: &str, rel: &str, n: u32, alpha: &str) -> Result<String, String> {
    let pres = region(poly, rel)?;
    let alpha = MultiIndex::parse(alpha).map_err(err)?;
    let res = epsilon_resolution_set(&pres, &alpha, n, &Limits::default()).map_err(err)?;
    Ok(charts_json(&res, 6)?.to_string())
}

#[wasm_bindgen(js_name = decomposeRegion)]
pub fn decompose_region_js(poly: &str, rel: &str) -> Result<String, JsValue> {
    decompose_region(poly, rel).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = resolveInterval)]
pub fn resolve_interval_js(poly: &str, r: u32) -> Result<String, JsValue> {
    resolve_interval(poly, r).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = resolveRegion)]
pub fn resolve_region_js(poly: &str, rel: &str, n: u32, alpha: &str) -> Result<String, JsValue> {
    resolve_region(poly, rel, n, alpha).map_err(|e| JsValue::from_str(&e))
}
