use prodgrid_wasm_demo::{modulus_curves_json, permutation_deviation_json, sample_grid_json};

#[test]
fn modulus_curves_are_monotone() {
    let v = modulus_curves_json(2, 2, 0.5, 50).unwrap();
    let mix: Vec<f64> = serde_json::from_value(v["mixture"].clone()).unwrap();
    assert_eq!(mix.len(), 50);
    assert!(mix.windows(2).all(|w| w[0] <= w[1]));
    assert!((mix[49] - 0.5).abs() < 1e-12);
    assert!(modulus_curves_json(2, 2, 0.5, 1).is_err());
}

#[test]
fn deviation_is_seeded() {
    let a = permutation_deviation_json(8, 2, 20, 3, "mean").unwrap();
    let b = permutation_deviation_json(8, 2, 20, 3, "mean").unwrap();
    assert_eq!(a["deviations"], b["deviations"]);
    assert_eq!(a["deviations"].as_array().unwrap().len(), 20);
    let p = permutation_deviation_json(8, 200, 5, 3, "product").unwrap();
    assert!(p["mean"].as_f64().unwrap() < a["mean"].as_f64().unwrap());
    assert!(permutation_deviation_json(8, 2, 5, 3, "median").is_err());
    assert!(permutation_deviation_json(1000, 2, 5, 3, "mean").is_err());
}

#[test]
fn grid_traces_within_bound() {
    let g = sample_grid_json(10, 15, 7).unwrap();
    assert_eq!(g["points"].as_array().unwrap().len(), 15);
    assert!(g["log2_traces"].as_f64().unwrap() <= g["log2_bound"].as_f64().unwrap() + 1e-9);
}
