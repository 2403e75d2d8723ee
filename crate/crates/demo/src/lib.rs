//! Browser demo: lattice geometry, the 1D Ising series against exact
//! enumeration, and the threshold table. Each operation is a plain function
//! returning JSON, wrapped for wasm-bindgen below.

use gibbs_core::expansion::{thermodynamic_probability, ExpansionOptions, ExpansionReport};
use gibbs_core::graphkit::{associated_graph, associated_track, lambda0, size_of};
use gibbs_core::lattice::LatticePoint;
use gibbs_core::model::{build_ising, ising_field_for, CylinderEvent, IsingFields};
use gibbs_core::{Budget, Error, Region, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Browser-friendly caps; the page should answer within a second.
const MAX_SERIES_ORDER: usize = 6;
const MAX_ORACLE_CUBE: u32 = 8;
const MAX_NU: usize = 3;

#[derive(Serialize)]
struct Geometry {
    size: u32,
    vertices: Vec<LatticePoint>,
    edges: Vec<(LatticePoint, LatticePoint)>,
    track: Vec<LatticePoint>,
}

#[derive(Serialize)]
struct Threshold {
    nu: usize,
    r: u32,
    l: u64,
    denominator: String,
    lambda0: f64,
}

fn to_json(value: &impl Serialize) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// S(B), the associated graph and the associated track of a point list
/// given as JSON, e.g. `[[0,0],[2,1]]`.
pub fn geometry(points_json: &str) -> Result<String> {
    let points: Vec<LatticePoint> =
        serde_json::from_str(points_json).map_err(|e| Error::InvalidInput(format!("points: {e}")))?;
    let region = Region::new(points)?;
    let budget = Budget::default();
    let graph = associated_graph(&region, &budget)?;
    let track = associated_track(&region, &budget)?;
    to_json(&Geometry {
        size: size_of(&region, &budget)?,
        vertices: graph.vertices().points().to_vec(),
        edges: graph.edges().to_vec(),
        track: track.points().to_vec(),
    })
}

/// The series for P(ω(0) = +1) in the 1D Ising chain with unit coupling,
/// compared with exact enumeration on the cube of radius `oracle_cube`.
pub fn ising_series(p_plus: f64, lambda: f64, n_max: usize, oracle_cube: u32) -> Result<String> {
    if n_max > MAX_SERIES_ORDER || oracle_cube > MAX_ORACLE_CUBE {
        return Err(Error::InvalidInput(format!(
            "the demo allows n_max ≤ {MAX_SERIES_ORDER} and N ≤ {MAX_ORACLE_CUBE}"
        )));
    }
    let report = series_report(p_plus, lambda, n_max, oracle_cube)?;
    to_json(&report)
}

fn series_report(p_plus: f64, lambda: f64, n_max: usize, oracle_cube: u32) -> Result<ExpansionReport> {
    let model = build_ising(1, lambda, &[1.0], &IsingFields::uniform(ising_field_for(p_plus)?))?;
    let event = CylinderEvent::site_in(LatticePoint::from([0]), vec![1.0])?;
    let options = ExpansionOptions {
        oracle_cube: Some(oracle_cube),
        ..ExpansionOptions::default()
    };
    thermodynamic_probability(&model, &event, n_max, &options, &Budget::default())
}

/// L and λ₀ for ν = 1..=max_nu at range r.
pub fn thresholds(max_nu: usize, r: u32) -> Result<String> {
    if !(1..=MAX_NU).contains(&max_nu) || !(1..=2).contains(&r) {
        return Err(Error::InvalidInput(format!(
            "the demo allows 1 ≤ ν ≤ {MAX_NU} and r ∈ {{1, 2}}"
        )));
    }
    let budget = Budget::default();
    let rows = (1..=max_nu)
        .map(|nu| {
            let l0 = lambda0(nu, r, &budget)?;
            Ok(Threshold {
                nu,
                r,
                l: l0.l,
                denominator: l0.denominator.to_string(),
                lambda0: l0.value(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    to_json(&rows)
}

fn js(result: Result<String>) -> std::result::Result<String, JsError> {
    result.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = geometry)]
pub fn geometry_js(points_json: &str) -> std::result::Result<String, JsError> {
    js(geometry(points_json))
}

#[wasm_bindgen(js_name = isingSeries)]
pub fn ising_series_js(
    p_plus: f64,
    lambda: f64,
    n_max: usize,
    oracle_cube: u32,
) -> std::result::Result<String, JsError> {
    js(ising_series(p_plus, lambda, n_max, oracle_cube))
}

#[wasm_bindgen(js_name = thresholds)]
pub fn thresholds_js(max_nu: usize, r: u32) -> std::result::Result<String, JsError> {
    js(thresholds(max_nu, r))
}
