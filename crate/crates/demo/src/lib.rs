//! Browser demo: three operations over the `legfol` core, exported through
//! `wasm-bindgen`. Each has a plain-Rust twin so it can be tested natively.

use legfol::bundle::{parallel_transport, FlatDiskBundle, OdeOptions};
use legfol::coiso::{GraphSubmanifold, HitCriterion, SCAN_TOL};
use legfol::germ::{
    build_nonsingular_germ, interpolation_contactness, FoliatedInput, InterpolationOptions,
};
use legfol::grid::Grid;
use wasm_bindgen::prelude::*;

/// Heatmap of `max |lambda|` for the graph `z = f(x1, x2, y2)` on the slice
/// `x1 = const`, over `(x2, y2) in [-r, r]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub res: usize,
    /// Row-major, `y2` along rows and `x2` along columns.
    pub values: Vec<f64>,
    /// Row-major flags for cells passing the singular-point test.
    pub hits: Vec<bool>,
}

pub fn lambda_heatmap(z: &str, x1: f64, radius: f64, res: usize) -> Result<Heatmap, String> {
    let y = GraphSubmanifold::standard_from_strs(2, 3, &["0", z]).map_err(|e| e.to_string())?;
    let crit = HitCriterion::new(&y, SCAN_TOL).map_err(|e| e.to_string())?;
    let res = res.clamp(2, 400);
    let step = 2.0 * radius / (res - 1) as f64;
    let mut values = Vec::with_capacity(res * res);
    let mut hits = Vec::with_capacity(res * res);
    for row in 0..res {
        for col in 0..res {
            let p = [x1, -radius + col as f64 * step, -radius + row as f64 * step];
            values.push(crit.lambda_norm(&p));
            hits.push(crit.is_hit(&p));
        }
    }
    Ok(Heatmap { res, values, hits })
}

/// Orbit `x, h(x), h(h(x)), ...` of the holonomy around the circle base of
/// the bundle with lift `d/ds + g (-v d/du + u d/dv)`, `g = g(s, u, v)`.
/// Returns interleaved `u, v` pairs; stops early if a point leaves the disk.
pub fn holonomy_orbit(twist: &str, u: f64, v: f64, steps: usize) -> Result<Vec<f64>, String> {
    let a = format!("-({twist})*v");
    let b = format!("({twist})*u");
    let bundle = FlatDiskBundle::from_strs(&[("s", 1.0)], ["u", "v"], 1.0, &[(&a, &b)], 1)
        .map_err(|e| e.to_string())?;
    let path = [vec![0.0], vec![1.0]];
    let mut x = [u, v];
    let mut out = vec![u, v];
    for _ in 0..steps.min(2000) {
        let t = parallel_transport(&bundle, &path, x, OdeOptions::default())
            .map_err(|e| e.to_string())?;
        if t.escaped {
            break;
        }
        x = t.end;
        out.extend(x);
    }
    Ok(out)
}

/// Smallest `|alpha_t ^ d alpha_t|` over a grid in `(t, x1)`, for each of
/// `samples` values of `t` between the germs built from `f0 dt` and `f1 dt`
/// with the line field `d/dt + r d/dx1`.
pub fn interpolation_profile(
    f0: &str,
    f1: &str,
    r: &str,
    samples: usize,
) -> Result<Vec<f64>, String> {
    let region = Grid::cube(2, 0.5, 6);
    let build = |f: &str| {
        let input = FoliatedInput::from_strs(
            &["t", "x1"],
            &format!("({f})*dt"),
            &["1", r],
            region.clone(),
        )
        .map_err(|e| e.to_string())?;
        build_nonsingular_germ(&input).map_err(|e| e.to_string())
    };
    let (g0, g1) = (build(f0)?, build(f1)?);
    let samples = samples.clamp(2, 200);
    let opts = InterpolationOptions {
        t_samples: (0..samples)
            .map(|i| i as f64 / (samples - 1) as f64)
            .collect(),
        ..Default::default()
    };
    let rep = interpolation_contactness(&g0, &g1, &region, &opts).map_err(|e| e.to_string())?;
    Ok(rep.per_t.iter().map(|c| c.min_abs).collect())
}

#[wasm_bindgen(js_name = lambdaHeatmap)]
pub fn lambda_heatmap_js(z: &str, x1: f64, radius: f64, res: usize) -> Result<Vec<f64>, JsValue> {
    let h = lambda_heatmap(z, x1, radius, res).map_err(|e| JsValue::from_str(&e))?;
    // negative entries mark singular cells
    Ok(h.values
        .iter()
        .zip(&h.hits)
        .map(|(v, hit)| if *hit { -1.0 } else { *v })
        .collect())
}

#[wasm_bindgen(js_name = holonomyOrbit)]
pub fn holonomy_orbit_js(twist: &str, u: f64, v: f64, steps: usize) -> Result<Vec<f64>, JsValue> {
    holonomy_orbit(twist, u, v, steps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = interpolationProfile)]
pub fn interpolation_profile_js(
    f0: &str,
    f1: &str,
    r: &str,
    samples: usize,
) -> Result<Vec<f64>, JsValue> {
    interpolation_profile(f0, f1, r, samples).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_finds_the_singular_line() {
        let h = lambda_heatmap("(x2^2 + y2^2)/2", 0.3, 0.5, 11).unwrap();
        let centre = 5 * 11 + 5;
        assert!(h.hits[centre]);
        assert_eq!(h.hits.iter().filter(|&&b| b).count(), 1);
        assert!(h.values[0] > 0.1);
        assert!(lambda_heatmap("x2 +", 0.0, 0.5, 4).is_err());
    }

    #[test]
    fn constant_twist_orbit_is_a_rotation() {
        let orbit = holonomy_orbit("0.5", 0.6, 0.0, 4).unwrap();
        assert_eq!(orbit.len(), 10);
        for k in 0..5 {
            let angle = 0.5 * k as f64;
            assert!((orbit[2 * k] - 0.6 * angle.cos()).abs() < 1e-6);
            assert!((orbit[2 * k + 1] - 0.6 * angle.sin()).abs() < 1e-6);
        }
    }

    #[test]
    fn interpolation_profile_and_flipped_orientation() {
        let p = interpolation_profile("1 + t^2", "2 + x1", "t", 5).unwrap();
        assert_eq!(p.len(), 5);
        assert!(p.iter().all(|&m| m > 0.5));
        let err = interpolation_profile("1", "-1", "0", 5).unwrap_err();
        assert!(
            err.contains("transverse") || err.contains("orient"),
            "{err}"
        );
    }

    #[test]
    fn page_defaults_evaluate() {
        let page = include_str!("../www/index.html");
        for default in [
            "(x2^2 + y2^2)/2",
            "1 + u^2 + v^2",
            "1 + t^2",
            "2 + sin(3*x1)",
            "t*x1",
        ] {
            assert!(page.contains(&format!("value=\"{default}\"")), "{default}");
        }
        assert_eq!(
            lambda_heatmap("(x2^2 + y2^2)/2", 0.0, 0.5, 81)
                .unwrap()
                .hits
                .iter()
                .filter(|&&b| b)
                .count(),
            1
        );
        assert!(holonomy_orbit("1 + u^2 + v^2", 0.4, 0.2, 60).unwrap().len() > 2);
        let p = interpolation_profile("1 + t^2", "2 + sin(3*x1)", "t*x1", 41).unwrap();
        assert_eq!(p.len(), 41);
        assert!(p.iter().all(|m| m.is_finite()));
    }
}
