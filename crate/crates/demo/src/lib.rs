//! Browser bindings: invariant spectra, family sweeps, and disc
//! automorphisms drawn on a polar grid.

use wasm_bindgen::prelude::*;

use bsdkit::autgroups::{act, transvection_type1};
use bsdkit::domains::DomainSpec;
use bsdkit::invariants::{distinguish, invariant_spectrum, DEFAULT_TOL};
use bsdkit::polymaps::{parse_selector, point_from_variables, CatalogId, CatalogParams};
use bsdkit::verify::{grid, sweep};
use bsdkit::C64;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

pub fn spectrum_json(selector: &str) -> Result<String, String> {
    let f = parse_selector(selector, &CatalogParams::default()).map_err(|e| e.to_string())?;
    let s = invariant_spectrum(&f).map_err(|e| e.to_string())?;
    serde_json::to_string(&s).map_err(|e| e.to_string())
}

pub fn distinguish_json(a: &str, b: &str) -> Result<String, String> {
    let base = CatalogParams::default();
    let f = parse_selector(a, &base).map_err(|e| e.to_string())?;
    let g = parse_selector(b, &base).map_err(|e| e.to_string())?;
    let d = distinguish(&f, &g, DEFAULT_TOL).map_err(|e| e.to_string())?;
    serde_json::to_string(&d).map_err(|e| e.to_string())
}

/// Row-major distance matrix of the family over `lo..=hi`, preceded by the grid.
pub fn sweep_json(family: &str, lo: f64, hi: f64, step: f64) -> Result<String, String> {
    let id: CatalogId = family.parse().map_err(|e: bsdkit::Error| e.to_string())?;
    let dims: &[usize] = if id == CatalogId::FamilyBigG { &[2, 2] } else { &[] };
    let ts = grid(lo, hi, step).map_err(|e| e.to_string())?;
    if ts.len() > 41 {
        return Err(format!("grid has {} points, at most 41 allowed", ts.len()));
    }
    let m = sweep(id, &ts, dims).map_err(|e| e.to_string())?;
    serde_json::to_string(&serde_json::json!({ "grid": ts, "distances": m })).map_err(|e| e.to_string())
}

/// Images of a polar grid in the unit disc under the automorphism taking 0
/// to `re + i im`, as flat `[x0, y0, x1, y1, ...]`, rings first then spokes,
/// each polyline `samples` points long.
pub fn disc_grid_points(re: f64, im: f64, rings: usize, spokes: usize, samples: usize) -> Result<Vec<f64>, String> {
    let spec = DomainSpec::type_i(1, 1).map_err(|e| e.to_string())?;
    let centre = point_from_variables(spec, &[C64::new(re, im)]).map_err(|e| e.to_string())?;
    let e = transvection_type1(&centre).map_err(|e| e.to_string())?;
    let samples = samples.max(2);
    let mut sources = Vec::with_capacity((rings + spokes) * samples);
    for k in 1..=rings {
        let r = k as f64 / (rings + 1) as f64;
        sources.extend((0..samples).map(|j| C64::from_polar(r, std::f64::consts::TAU * j as f64 / (samples - 1) as f64)));
    }
    for k in 0..spokes {
        let theta = std::f64::consts::TAU * k as f64 / spokes.max(1) as f64;
        sources.extend((0..samples).map(|j| C64::from_polar(0.999 * j as f64 / (samples - 1) as f64, theta)));
    }
    let mut out = Vec::with_capacity(2 * sources.len());
    for z in sources {
        let p = point_from_variables(spec, &[z]).map_err(|e| e.to_string())?;
        let w = act(&e, &p).map_err(|e| e.to_string())?.coords()[0];
        out.push(w.re);
        out.push(w.im);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn spectrum(selector: &str) -> Result<String, JsError> {
    spectrum_json(selector).map_err(js)
}

#[wasm_bindgen]
pub fn compare(a: &str, b: &str) -> Result<String, JsError> {
    distinguish_json(a, b).map_err(js)
}

#[wasm_bindgen(js_name = sweepFamily)]
pub fn sweep_family(family: &str, lo: f64, hi: f64, step: f64) -> Result<String, JsError> {
    sweep_json(family, lo, hi, step).map_err(js)
}

#[wasm_bindgen(js_name = discGrid)]
pub fn disc_grid(re: f64, im: f64, rings: usize, spokes: usize, samples: usize) -> Result<Vec<f64>, JsError> {
    disc_grid_points(re, im, rings, spokes, samples).map_err(js)
}

/// Catalog names accepted by `spectrum` and `compare`.
#[wasm_bindgen(js_name = catalogNames)]
pub fn catalog_names() -> Vec<String> {
    CatalogId::ALL.iter().map(|id| id.name().to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_of_f_family() {
        let v: serde_json::Value = serde_json::from_str(&spectrum_json("f_t:0.3").unwrap()).unwrap();
        let first = v["degrees"]["1"][0].as_f64().unwrap();
        assert!((first - (0.6f64 / 1.7).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn compare_reports_verdict() {
        let v: serde_json::Value = serde_json::from_str(&distinguish_json("f_t:0.2", "f_t:0.7").unwrap()).unwrap();
        assert_eq!(v["verdict"], "inequivalent");
        assert!(distinguish_json("f_t:0.2", "nope").is_err());
    }

    #[test]
    fn sweep_is_symmetric_with_zero_diagonal() {
        let v: serde_json::Value = serde_json::from_str(&sweep_json("h_t", 0.0, 1.0, 0.25).unwrap()).unwrap();
        let m = v["distances"].as_array().unwrap();
        assert_eq!(m.len(), 5);
        for i in 0..5 {
            assert_eq!(m[i][i].as_f64().unwrap(), 0.0);
            for j in 0..5 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        assert!(sweep_json("h_t", 0.0, 1.0, 0.001).is_err());
    }

    #[test]
    fn disc_grid_stays_in_disc() {
        let pts = disc_grid_points(0.4, -0.3, 3, 6, 20).unwrap();
        assert_eq!(pts.len(), 2 * (3 + 6) * 20);
        for xy in pts.chunks(2) {
            assert!(xy[0] * xy[0] + xy[1] * xy[1] < 1.0);
        }
        // first spoke point is the image of the origin
        let spoke = 2 * 3 * 20;
        assert!((pts[spoke] - 0.4).abs() < 1e-12 && (pts[spoke + 1] + 0.3).abs() < 1e-12);
        assert!(disc_grid_points(1.0, 0.0, 1, 1, 4).is_err());
    }

    #[test]
    fn names_are_listed() {
        assert!(catalog_names().iter().any(|n| n == "f_t"));
    }
}
