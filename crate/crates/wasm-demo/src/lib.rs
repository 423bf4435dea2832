//! Three operations for the static page in `www/`: the spectrum, `M` along a
//! horizontal line, and the `I(eps)` ladder of `psi^{(j)}`.

use nentire_core::nentire::l2_classification;
use nentire_core::ode::Engine;
use nentire_core::spectral::compute_spectrum;
use nentire_core::weyl::{sample_line, WeylFunction};
use nentire_core::{BoundaryCondition, PotentialSpec, SturmLiouvilleProblem, C64};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_ATOMS: usize = 60;
const MAX_SAMPLES: usize = 800;

/// `q(x) = q1 x`, or the unperturbed operator when `q1 = 0`.
pub fn problem(l: f64, b: f64, beta: f64, q1: f64) -> Result<SturmLiouvilleProblem, String> {
    let q = if q1 == 0.0 { PotentialSpec::Free } else { PotentialSpec::Polynomial { coefficients: vec![q1], lowest_power: 1 } };
    let bc = BoundaryCondition::new(beta).map_err(|e| e.to_string())?;
    SturmLiouvilleProblem::new(l, b, q, bc).map_err(|e| e.to_string())
}

/// Flat `[lambda_1, gamma_1, lambda_2, gamma_2, ...]`.
pub fn spectrum_pairs(p: &SturmLiouvilleProblem, count: usize) -> Result<Vec<f64>, String> {
    let engine = Engine::with_defaults(p);
    let s = compute_spectrum(&engine, None, count.clamp(1, MAX_ATOMS)).map_err(|e| e.to_string())?;
    Ok(s.atoms().flat_map(|(l, g)| [l, g]).collect())
}

/// Flat `[x, Re M, Im M, ...]` on `x + i eta`; NaN where evaluation fails.
pub fn weyl_samples(p: &SturmLiouvilleProblem, x0: f64, x1: f64, eta: f64, n: usize) -> Result<Vec<f64>, String> {
    let engine = Engine::with_defaults(p);
    let wf = WeylFunction::new(&engine).map_err(|e| e.to_string())?;
    let n = n.clamp(2, MAX_SAMPLES);
    Ok(sample_line(&wf, C64::new(x0, eta), C64::new(x1, eta), n)
        .into_iter()
        .flat_map(|(z, m)| {
            let m = m.unwrap_or(C64::new(f64::NAN, f64::NAN));
            [z.re, m.re, m.im]
        })
        .collect())
}

/// Ladder, exponent and verdict as JSON.
pub fn ladder_json(p: &SturmLiouvilleProblem, z: C64, j: usize) -> Result<String, String> {
    let engine = Engine::with_defaults(p);
    let r = l2_classification(&engine, z, j).map_err(|e| e.to_string())?;
    Ok(json!({ "j": r.j, "ladder": r.ladder, "s": r.s, "local_exponent": r.local_exponent, "class": r.class }).to_string())
}

fn js(e: String) -> JsValue {
    JsValue::from_str(&e)
}

#[wasm_bindgen]
pub fn eigenvalues(l: f64, b: f64, beta: f64, q1: f64, count: usize) -> Result<Vec<f64>, JsValue> {
    spectrum_pairs(&problem(l, b, beta, q1).map_err(js)?, count).map_err(js)
}

#[wasm_bindgen]
pub fn weyl_line(l: f64, b: f64, beta: f64, q1: f64, x0: f64, x1: f64, eta: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    weyl_samples(&problem(l, b, beta, q1).map_err(js)?, x0, x1, eta, n).map_err(js)
}

#[wasm_bindgen]
pub fn psi_ladder(l: f64, b: f64, beta: f64, q1: f64, z_re: f64, z_im: f64, j: usize) -> Result<String, JsValue> {
    ladder_json(&problem(l, b, beta, q1).map_err(js)?, C64::new(z_re, z_im), j).map_err(js)
}
