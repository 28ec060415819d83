//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes plain numbers or strings and returns a JSON string;
//! failures come back as `{"error": "..."}` so the page has one code path.

use bicluster_core::bounds::{alpha_objective, analytic_optima, AlphaCase, AlphaPoint};
use bicluster_core::search::ALPHA_L1_BINARY;
use bicluster_core::worstcase::{worst_case_report, WorstCaseSpec};
use bicluster_core::{ratio, DataMatrix, Norm, Partition};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest worst-case index the page will render.
pub const MAX_Q: u32 = 250;
pub const MAX_HEATMAP_CELLS: u32 = 200;
pub const MAX_HEATMAP_STEPS: u32 = 64;

fn render(result: Result<Value, String>) -> String {
    result.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

fn clusters(p: &Partition) -> Value {
    json!(p.clusters_one_based())
}

/// The q-th worst-case matrix with the scheme's and the optimal row
/// partitions and their costs.
#[wasm_bindgen]
pub fn worst_case(q: u32) -> String {
    render(worst_case_value(q))
}

fn worst_case_value(q: u32) -> Result<Value, String> {
    if q == 0 || q > MAX_Q {
        return Err(format!("q must be in 1..={MAX_Q}"));
    }
    let q = q as usize;
    let spec = WorstCaseSpec::new(q).map_err(|e| e.to_string())?;
    let x = spec.matrix();
    let r = worst_case_report(q).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<u8>> = (0..x.n_rows())
        .map(|i| x.row(i).iter().map(|&v| v as u8).collect())
        .collect();
    Ok(json!({
        "q": q,
        "matrix": rows,
        "l": r.l,
        "l_star": r.l_star,
        "ratio": r.ratio,
        "limit": 2.0,
        "scheme_rows": clusters(&r.scheme_rows),
        "optimal_rows": clusters(&r.optimal_rows),
        "passed": r.passed,
    }))
}

fn parse_case(case: &str) -> Result<AlphaCase, String> {
    match case {
        "i" => Ok(AlphaCase::I),
        "ii" => Ok(AlphaCase::II),
        "iii" => Ok(AlphaCase::III),
        other => Err(format!("unknown case {other:?}; expected i, ii or iii")),
    }
}

/// Feasible points of `case` at `(x, y)`, sampling each free variable at
/// `steps + 1` evenly spaced values across its range.
fn case_points(case: AlphaCase, x: f64, y: f64, steps: u32) -> Vec<AlphaPoint> {
    let s = steps as f64;
    let frac = |k: u32| k as f64 / s;
    let base = AlphaPoint {
        x,
        y,
        a: x * y,
        b: 0.0,
        c: 0.0,
        d: 0.0,
        case,
    };
    match case {
        AlphaCase::I => (0..=steps)
            .map(|k| AlphaPoint {
                b: x * (1.0 - y),
                c: (1.0 - x) * y,
                d: frac(k) * (1.0 - x) * (1.0 - y),
                ..base
            })
            .collect(),
        AlphaCase::II => (0..=steps)
            .flat_map(|kb| {
                (0..=steps).map(move |kc| AlphaPoint {
                    b: frac(kb) * x * (1.0 - y),
                    c: frac(kc) * (1.0 - x) * y,
                    ..base
                })
            })
            .collect(),
        AlphaCase::III => (0..=steps)
            .map(|k| AlphaPoint {
                a: frac(k) * x * y,
                ..base
            })
            .collect(),
    }
}

/// Best sampled objective per cell of a `cells` x `cells` grid over
/// `(x, y)` at cell centres. Infeasible cells are `null`. Rows of `values`
/// are indexed by `y`.
#[wasm_bindgen]
pub fn alpha_heatmap(case: &str, cells: u32, steps: u32) -> String {
    render(alpha_heatmap_value(case, cells, steps))
}

fn alpha_heatmap_value(case: &str, cells: u32, steps: u32) -> Result<Value, String> {
    let case = parse_case(case)?;
    if !(1..=MAX_HEATMAP_CELLS).contains(&cells) {
        return Err(format!("cells must be in 1..={MAX_HEATMAP_CELLS}"));
    }
    if !(1..=MAX_HEATMAP_STEPS).contains(&steps) {
        return Err(format!("steps must be in 1..={MAX_HEATMAP_STEPS}"));
    }
    let n = cells as f64;
    let mut best: Option<(f64, f64, f64)> = None;
    let values: Vec<Vec<Option<f64>>> = (0..cells)
        .map(|j| {
            let y = (j as f64 + 0.5) / n;
            (0..cells)
                .map(|i| {
                    let x = (i as f64 + 0.5) / n;
                    let v = case_points(case, x, y, steps)
                        .iter()
                        .filter_map(|p| alpha_objective(p).ok().flatten())
                        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
                    if let Some(v) = v {
                        if best.is_none_or(|(b, _, _)| v > b) {
                            best = Some((v, x, y));
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();
    let optima: Vec<Value> = analytic_optima()
        .iter()
        .filter(|p| p.case == case)
        .map(|p| {
            json!({
                "x": p.x,
                "y": p.y,
                "value": alpha_objective(p).ok().flatten(),
            })
        })
        .collect();
    Ok(json!({
        "case": case,
        "cells": cells,
        "steps": steps,
        "values": values,
        "max": best.map(|b| json!({ "value": b.0, "x": b.1, "y": b.2 })),
        "optima": optima,
        "supremum": ALPHA_L1_BINARY,
    }))
}

/// Runs the scheme and the exhaustive optimum on a small CSV matrix.
#[wasm_bindgen]
pub fn compare(csv: &str, k_r: u32, k_c: u32, norm: &str) -> String {
    render(compare_value(csv, k_r, k_c, norm))
}

fn compare_value(csv: &str, k_r: u32, k_c: u32, norm: &str) -> Result<Value, String> {
    let norm: Norm = norm
        .parse()
        .map_err(|e: bicluster_core::Error| e.to_string())?;
    let x = DataMatrix::from_csv_reader(csv.as_bytes()).map_err(|e| e.to_string())?;
    let r = ratio(&x, k_r as usize, k_c as usize, norm).map_err(|e| e.to_string())?;
    Ok(json!({
        "n_rows": r.n_rows,
        "n_cols": r.n_cols,
        "binary": r.binary,
        "norm": norm.to_string(),
        "l_r": r.l_r,
        "l_c": r.l_c,
        "l": r.l,
        "l_star": r.l_star,
        "ratio": if r.ratio.is_finite() { json!(r.ratio) } else { json!("inf") },
        "alpha_bound": r.alpha_bound,
        "certified": r.certified,
        "scheme": {
            "rows": clusters(&r.scheme.rows),
            "cols": clusters(&r.scheme.cols),
            "per_bicluster_costs": r.scheme.per_bicluster_costs,
        },
        "optimal": {
            "rows": clusters(&r.optimal.rows),
            "cols": clusters(&r.optimal.cols),
        },
    }))
}
