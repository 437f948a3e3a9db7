//! Browser demo bindings for the factor-copula toolkit.
//!
//! Three operations drive the static demo page: a density heatmap over the
//! unit square, a simulated scatter cloud, and an estimated Kendall-tau
//! matrix.  Model specifications arrive as the same sectioned text the
//! command-line front end reads.
//!
//! Build with `wasm-pack build --target web` and serve `www/` next to the
//! generated `pkg/` directory.  The crate also compiles natively so the
//! bindings' logic stays unit-testable off the browser.

use factor_copula::modelspec::parse_model_spec;
use factor_copula::quadrature::IntegratorConfig;
use factor_copula::sampling::{sample_neofc, RngHandle};
use factor_copula::stats::kendall_tau_matrix;
use wasm_bindgen::prelude::*;

fn parse(spec: &str) -> Result<factor_copula::factor_model::FactorModel, String> {
    parse_model_spec(spec)
        .map(|parsed| parsed.model().clone())
        .map_err(|e| e.to_string())
}

fn density_grid_impl(spec: &str, grid: u32) -> Result<Vec<f64>, String> {
    if !(2..=200).contains(&grid) {
        return Err("grid must be between 2 and 200".into());
    }
    let model = parse(spec)?;
    if model.d() != 2 {
        return Err(format!(
            "the heatmap needs a bivariate model, this one has {} variables",
            model.d()
        ));
    }
    let cfg = IntegratorConfig::default_for_layers(model.w());
    let m = grid as usize;
    let mut values = Vec::with_capacity(m * m);
    // Row-major with the second coordinate on rows, so the canvas's top row
    // is u2 close to 1.
    for row in 0..m {
        let u2 = (m - row) as f64 / (m as f64 + 1.0);
        for col in 0..m {
            let u1 = (col + 1) as f64 / (m as f64 + 1.0);
            let est = model.density(&[u1, u2], &cfg).map_err(|e| e.to_string())?;
            values.push(est.value);
        }
    }
    Ok(values)
}

fn simulate_pairs_impl(spec: &str, n: u32, seed: u64) -> Result<Vec<f64>, String> {
    if !(1..=100_000).contains(&n) {
        return Err("n must be between 1 and 100000".into());
    }
    let model = parse(spec)?;
    let rows = sample_neofc(&model, n as usize, RngHandle::new(seed)).map_err(|e| e.to_string())?;
    let mut flat = Vec::with_capacity(2 * rows.len());
    for row in rows {
        flat.push(row[0]);
        flat.push(row[1]);
    }
    Ok(flat)
}

fn tau_matrix_impl(spec: &str, n: u32, seed: u64) -> Result<Vec<f64>, String> {
    if !(10..=100_000).contains(&n) {
        return Err("n must be between 10 and 100000".into());
    }
    let model = parse(spec)?;
    let rows = sample_neofc(&model, n as usize, RngHandle::new(seed)).map_err(|e| e.to_string())?;
    let matrix = kendall_tau_matrix(&rows).map_err(|e| e.to_string())?;
    Ok(matrix.into_iter().flatten().collect())
}

fn dimensions_impl(spec: &str) -> Result<Vec<u32>, String> {
    let model = parse(spec)?;
    Ok(vec![model.d() as u32, model.w() as u32])
}

/// Densities on a `grid x grid` mesh of the unit square, row-major from the
/// top of the canvas (returns a Float64Array of length `grid * grid`).
#[wasm_bindgen]
pub fn density_grid(spec: &str, grid: u32) -> Result<Vec<f64>, JsValue> {
    density_grid_impl(spec, grid).map_err(|e| JsValue::from_str(&e))
}

/// Draw `n` samples and return the first two coordinates interleaved
/// `[u1, u2, u1, u2, ...]`.
#[wasm_bindgen]
pub fn simulate_pairs(spec: &str, n: u32, seed: u64) -> Result<Vec<f64>, JsValue> {
    simulate_pairs_impl(spec, n, seed).map_err(|e| JsValue::from_str(&e))
}

/// Estimated Kendall-tau matrix from `n` simulated rows, flattened row-major.
#[wasm_bindgen]
pub fn tau_matrix(spec: &str, n: u32, seed: u64) -> Result<Vec<f64>, JsValue> {
    tau_matrix_impl(spec, n, seed).map_err(|e| JsValue::from_str(&e))
}

/// `[dimension, layers]` of the parsed model, for the page's input checks.
#[wasm_bindgen]
pub fn dimensions(spec: &str) -> Result<Vec<u32>, JsValue> {
    dimensions_impl(spec).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FGM_SPEC: &str = "\
[model]
dimension = 2
layers = 1

[inner]
family = indep

[linking.1]
families = fgm, fgm
params = 1, 1
";

    #[test]
    fn density_grid_matches_the_closure_formula() {
        let grid = 9;
        let values = density_grid_impl(FGM_SPEC, grid).unwrap();
        assert_eq!(values.len(), 81);
        // Outer copula is FGM(1/3): density 1 + (1/3)(1-2u)(1-2v).
        let m = grid as usize;
        for row in 0..m {
            let u2 = (m - row) as f64 / (m as f64 + 1.0);
            for col in 0..m {
                let u1 = (col + 1) as f64 / (m as f64 + 1.0);
                let expected = 1.0 + (1.0 / 3.0) * (1.0 - 2.0 * u1) * (1.0 - 2.0 * u2);
                let got = values[row * m + col];
                assert!(
                    (got - expected).abs() < 1e-6,
                    "({u1}, {u2}): {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn simulate_pairs_is_reproducible_and_in_range() {
        let a = simulate_pairs_impl(FGM_SPEC, 500, 42).unwrap();
        let b = simulate_pairs_impl(FGM_SPEC, 500, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1000);
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
        let c = simulate_pairs_impl(FGM_SPEC, 500, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn tau_matrix_is_symmetric_with_unit_diagonal() {
        let flat = tau_matrix_impl(FGM_SPEC, 2000, 7).unwrap();
        assert_eq!(flat.len(), 4);
        assert_eq!(flat[0], 1.0);
        assert_eq!(flat[3], 1.0);
        assert_eq!(flat[1], flat[2]);
        // FGM(1/3) has tau 2/27.
        assert!((flat[1] - 2.0 / 27.0).abs() < 0.05, "tau {}", flat[1]);
    }

    #[test]
    fn errors_are_readable_strings() {
        assert!(density_grid_impl("not a model", 10).is_err());
        assert!(density_grid_impl(FGM_SPEC, 1).is_err());
        let trivariate = "\
[model]
dimension = 3
layers = 1

[inner]
family = indep

[linking.1]
families = fgm, fgm, fgm
params = 1, 1, 1
";
        let err = density_grid_impl(trivariate, 10).unwrap_err();
        assert!(err.contains("bivariate"), "message: {err}");
        assert_eq!(dimensions_impl(trivariate).unwrap(), vec![3, 1]);
        // Scatter and tau still work for higher dimensions.
        assert_eq!(simulate_pairs_impl(trivariate, 50, 1).unwrap().len(), 100);
        assert_eq!(tau_matrix_impl(trivariate, 100, 1).unwrap().len(), 9);
    }
}
