//! WebAssembly bindings for the static demo page in `www/`.
//!
//! All values cross the boundary as JSON strings. The plain-Rust functions in
//! [`api`] do the work so they can be tested natively.

use wasm_bindgen::prelude::*;

pub mod api;

/// Generates a random world of `profile` ("simple" or "complex") as a workspace document.
#[wasm_bindgen(js_name = randomWorld)]
pub fn random_world(profile: &str, seed: u64) -> Result<String, JsError> {
    api::random_world(profile, seed).map_err(|e| JsError::new(&e))
}

/// Frame origins of the default arm at `q` (JSON array of six angles).
#[wasm_bindgen(js_name = armFrames)]
pub fn arm_frames(q: &str) -> Result<String, JsError> {
    api::arm_frames(q).map_err(|e| JsError::new(&e))
}

/// Samples a blocked query in `world` and plans it. `weights` may be empty unless
/// the planner is `neural`.
#[wasm_bindgen(js_name = planQuery)]
pub fn plan_query(world: &str, planner: &str, seed: u64, weights: &str) -> Result<String, JsError> {
    api::plan_query(world, planner, seed, weights).map_err(|e| JsError::new(&e))
}
