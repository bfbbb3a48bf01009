//! Browser bindings. Every export takes and returns a JSON string so the
//! page needs no generated type glue.

use metaplectic::classifier::{classify_unweighted, Exponent, ExponentPair};
use metaplectic::harness::{run_sweep, EpsGrid, MatrixSource, SweepConfig};
use metaplectic::tfa::{discrete_ambiguity, Grid, SampledSignal};
use serde::Deserialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest `n` the demo samples; the ambiguity grid has `n^2` points.
const MAX_N: usize = 256;

#[derive(Deserialize)]
struct ClassifyRequest {
    matrix: MatrixSource,
    p: Exponent,
    q: Exponent,
}

#[derive(Deserialize)]
struct CurveRequest {
    matrix: MatrixSource,
    p: Exponent,
    q: Exponent,
    eps: EpsGrid,
}

#[derive(Deserialize)]
struct AmbiguityRequest {
    eps: f64,
    n: usize,
    #[serde(rename = "T")]
    t: f64,
}

fn parse<'a, T: Deserialize<'a>>(input: &'a str) -> Result<T, String> {
    serde_json::from_str(input).map_err(|e| format!("bad request: {e}"))
}

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn classify_json(input: &str) -> Result<String, String> {
    let req: ClassifyRequest = parse(input)?;
    let s = req.matrix.load(None).map_err(text)?;
    let verdict = classify_unweighted(&s, ExponentPair::new(req.p, req.q));
    serde_json::to_string(&verdict).map_err(text)
}

pub fn ratio_curve_json(input: &str) -> Result<String, String> {
    let req: CurveRequest = parse(input)?;
    let cfg = SweepConfig {
        matrix: req.matrix,
        p: req.p,
        q: req.q,
        weight: None,
        eps: req.eps,
        fit_window: 0.5,
        fit_tolerance: metaplectic::harness::DEFAULT_FIT_TOLERANCE,
        regime: None,
        csv: None,
        report: None,
    };
    let report = run_sweep(&cfg, None).map_err(text)?;
    serde_json::to_string(&report).map_err(text)
}

/// `|A(g o sqrt(eps^2 - 1), g)|` on the `n x n` phase-space grid, row-major
/// with `x` slowest.
pub fn ambiguity_modulus_json(input: &str) -> Result<String, String> {
    let req: AmbiguityRequest = parse(input)?;
    if req.n > MAX_N {
        return Err(format!("n must be at most {MAX_N}"));
    }
    if !(req.eps > 1.0) {
        return Err("eps must exceed 1".into());
    }
    let grid = Grid::new(1, req.n, req.t).map_err(text)?;
    let g = SampledSignal::gaussian(grid);
    let f = SampledSignal::dilated_gaussian(grid, 1.0 / (req.eps * req.eps - 1.0).sqrt());
    let a = discrete_ambiguity(&f, &g).map_err(text)?;
    let values: Vec<f64> = a.values.iter().map(|v| v.norm()).collect();
    Ok(json!({"n": req.n, "T": req.t, "eps": req.eps, "values": values}).to_string())
}

#[wasm_bindgen]
pub fn classify(input: &str) -> Result<String, JsError> {
    classify_json(input).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ratio_curve(input: &str) -> Result<String, JsError> {
    ratio_curve_json(input).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ambiguity_modulus(input: &str) -> Result<String, JsError> {
    ambiguity_modulus_json(input).map_err(|e| JsError::new(&e))
}
