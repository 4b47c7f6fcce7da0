//! Browser bindings for the static demo page in `www/`.
//!
//! Every export takes plain strings and returns JSON text, so the page needs
//! no generated TypeScript types.

use wasm_bindgen::prelude::*;

use witnesskit::closest::closest_ppt;
use witnesskit::states::FamilySpec;
use witnesskit::sweep::{detect, run_sweep, Mode, Reference, ScanRange};
use witnesskit::witness::SeeSawConfig;

fn family(spec: &str) -> Result<FamilySpec, String> {
    spec.parse().map_err(|e: witnesskit::Error| e.to_string())
}

fn to_json(v: &impl serde::Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Rows `{param, value, bound, detected}` along a one-parameter family.
pub fn scan_json(spec: &str, range: &str, mode: &str) -> Result<String, String> {
    let fam = family(spec)?;
    let range: ScanRange = range.parse().map_err(|e: witnesskit::Error| e.to_string())?;
    if range.n > 2000 {
        return Err("at most 2000 grid points".into());
    }
    let mode: Mode = mode.parse().map_err(|e: witnesskit::Error| e.to_string())?;
    let rows = run_sweep(&fam, &range, mode, &SeeSawConfig::default()).map_err(|e| e.to_string())?;
    to_json(&rows)
}

/// Detection report for one family member.
pub fn detect_json(spec: &str, mode: &str) -> Result<String, String> {
    let fam = family(spec)?;
    let mode: Mode = mode.parse().map_err(|e: witnesskit::Error| e.to_string())?;
    let rho = fam.state().map_err(|e| e.to_string())?;
    let report =
        detect(&rho, Some(&fam), &Reference::Auto, mode, &SeeSawConfig::default()).map_err(|e| e.to_string())?;
    Ok(report.to_json(false))
}

/// Closest PPT state, cut on the last party.
pub fn closest_ppt_json(spec: &str) -> Result<String, String> {
    let rho = family(spec)?.state().map_err(|e| e.to_string())?;
    let r = closest_ppt(&rho, rho.parties() - 1).map_err(|e| e.to_string())?;
    to_json(&r.to_json())
}

#[wasm_bindgen]
pub fn scan(spec: &str, range: &str, mode: &str) -> Result<String, JsValue> {
    scan_json(spec, range, mode).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = detectState)]
pub fn detect_state(spec: &str, mode: &str) -> Result<String, JsValue> {
    detect_json(spec, mode).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = closestPpt)]
pub fn closest_ppt_state(spec: &str) -> Result<String, JsValue> {
    closest_ppt_json(spec).map_err(|e| JsValue::from_str(&e))
}
