//! Browser demo: three interactive views of multi-matrix reconciliation.
//!
//! * [`fer_curve`]: frame error rate and mean iterations against `e` for
//!   `u = 1..=u_max`.
//! * [`decode_trace`]: bit errors left after each decoder iteration for
//!   one frame.
//! * [`matrix_view`]: the edges, degrees and girth of one PEG matrix.
//!
//! Each operation returns JSON; seeds are 32-bit so they stay plain JS
//! numbers. The pure `*_data` functions behind them are
//! plain Rust and tested natively.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use mmrecon::bench::frame_pair;
use mmrecon::channel::efficiency;
use mmrecon::decoder::{ensemble_syndromes, DecoderConfig, DecoderWorkspace};
use mmrecon::{build_ensemble, peg_construct, DegreeProfile, MatrixEnsemble};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest block length the page accepts; PEG in the browser is slow beyond.
pub const MAX_DEMO_N: usize = 4096;
pub const MAX_DEMO_U: usize = 4;

thread_local! {
    static ENSEMBLES: RefCell<HashMap<(usize, usize, u64), Rc<MatrixEnsemble>>> = RefCell::new(HashMap::new());
}

fn check_shape(n: usize, u: usize) -> Result<(), String> {
    if !(16..=MAX_DEMO_N).contains(&n) {
        return Err(format!("n must lie in 16..={MAX_DEMO_N}"));
    }
    if !(1..=MAX_DEMO_U).contains(&u) {
        return Err(format!("u must lie in 1..={MAX_DEMO_U}"));
    }
    Ok(())
}

/// Rate-1/2, column-degree-3 ensemble, built once per `(n, u, seed)`.
fn ensemble(n: usize, u: usize, seed: u64) -> Result<Rc<MatrixEnsemble>, String> {
    check_shape(n, u)?;
    if let Some(e) = ENSEMBLES.with(|c| c.borrow().get(&(n, u, seed)).cloned()) {
        return Ok(e);
    }
    let ens = Rc::new(build_ensemble(n, n / 2, &DegreeProfile::Regular(3), u, seed).map_err(|e| e.to_string())?);
    ENSEMBLES.with(|c| c.borrow_mut().insert((n, u, seed), ens.clone()));
    Ok(ens)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub u: usize,
    pub e: f64,
    pub f: f64,
    pub fer: f64,
    pub mean_iterations: f64,
}

pub fn fer_curve_data(n: usize, u_max: usize, e_values: &[f64], frames: usize, seed: u64) -> Result<Vec<CurvePoint>, String> {
    if frames == 0 {
        return Err("frames must be at least 1".into());
    }
    let full = ensemble(n, u_max, seed)?;
    let cfg = DecoderConfig::default();
    let mut points = Vec::new();
    for u in 1..=u_max {
        let ens = full.prefix(u).map_err(|e| e.to_string())?;
        let mut ws = DecoderWorkspace::new(&ens);
        for &e in e_values {
            let f = efficiency(ens.m(), n, e).map_err(|e| e.to_string())?.value();
            let (mut failures, mut iterations) = (0usize, 0usize);
            for frame in 0..frames as u64 {
                let (key, noisy) = frame_pair(n, e, seed, frame).map_err(|e| e.to_string())?;
                let z = ensemble_syndromes(&ens, &key).map_err(|e| e.to_string())?;
                let r = ws.decode(&ens, &noisy, &z, e, &cfg).map_err(|e| e.to_string())?;
                failures += (!r.converged || r.corrected != key) as usize;
                iterations += r.iterations_used;
            }
            points.push(CurvePoint {
                u,
                e,
                f,
                fer: failures as f64 / frames as f64,
                mean_iterations: iterations as f64 / frames as f64,
            });
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub initial_errors: usize,
    /// Bit errors against Alice's block after iteration `i + 1`.
    pub errors: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
}

pub fn decode_trace_data(n: usize, u: usize, e: f64, frame: u64, seed: u64) -> Result<Trace, String> {
    let ens = ensemble(n, u, seed)?;
    let (key, noisy) = frame_pair(n, e, seed, frame).map_err(|e| e.to_string())?;
    let z = ensemble_syndromes(&ens, &key).map_err(|e| e.to_string())?;
    let mut ws = DecoderWorkspace::new(&ens);
    let mut errors = Vec::new();
    let r = ws
        .decode_traced(&ens, &noisy, &z, e, &DecoderConfig::default(), |it, word| {
            if it > 0 {
                errors.push(word.hamming_distance(&key));
            }
        })
        .map_err(|e| e.to_string())?;
    Ok(Trace {
        initial_errors: noisy.hamming_distance(&key),
        errors,
        converged: r.converged,
        iterations: r.iterations_used,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixView {
    pub n: usize,
    pub m: usize,
    /// `[check, variable]` pairs.
    pub edges: Vec<[u32; 2]>,
    pub row_degrees: Vec<usize>,
    pub girth: Option<usize>,
}

pub fn matrix_view_data(n: usize, m: usize, degree: usize, seed: u64) -> Result<MatrixView, String> {
    check_shape(n, 1)?;
    let h = peg_construct(n, m, &DegreeProfile::Regular(degree), seed).map_err(|e| e.to_string())?;
    Ok(MatrixView {
        n,
        m,
        edges: h.edges().map(|(c, v)| [c as u32, v as u32]).collect(),
        row_degrees: (0..m).map(|j| h.row_degree(j)).collect(),
        girth: h.girth(),
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// JSON array of `{u, e, f, fer, mean_iterations}`. `e_values` is a
/// comma-separated list.
#[wasm_bindgen]
pub fn fer_curve(n: usize, u_max: usize, e_values: &str, frames: usize, seed: u32) -> Result<String, JsError> {
    let es: Result<Vec<f64>, _> = e_values.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let es = es.map_err(|e| JsError::new(&format!("bad e list: {e}")))?;
    to_js(fer_curve_data(n, u_max, &es, frames, seed.into()))
}

#[wasm_bindgen]
pub fn decode_trace(n: usize, u: usize, e: f64, frame: u32, seed: u32) -> Result<String, JsError> {
    to_js(decode_trace_data(n, u, e, frame.into(), seed.into()))
}

#[wasm_bindgen]
pub fn matrix_view(n: usize, m: usize, degree: usize, seed: u32) -> Result<String, JsError> {
    to_js(matrix_view_data(n, m, degree, seed.into()))
}
