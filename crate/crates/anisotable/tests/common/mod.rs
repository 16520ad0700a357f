#![allow(dead_code)]

use anisotable::{ExperimentConfig, ExperimentKind};
use serde_json::{json, Value};

pub fn hemi_model(alpha: f64, dim: usize, plus: f64, minus: f64) -> Value {
    let mut axis = vec![0.0; dim];
    axis[dim - 1] = 1.0;
    json!({
        "alpha": alpha, "dim": dim,
        "density": {"kind": "hemisphere", "axis": axis, "plus_weight": plus, "minus_weight": minus},
        "theta_low": 0.5, "theta_high": 3.0
    })
}

pub fn iso_model(alpha: f64, dim: usize) -> Value {
    json!({
        "alpha": alpha, "dim": dim,
        "density": {"kind": "constant", "value": 1.0},
        "theta_low": 0.5, "theta_high": 2.0
    })
}

pub fn half_plane() -> Value {
    json!({"kind": "halfspace", "axis": [0.0, 1.0]})
}

pub fn config(model: Value, domain: Value, scheme: Value, params: Value) -> ExperimentConfig {
    serde_json::from_value(json!({
        "model": model, "domain": domain, "scheme": scheme, "params": params
    }))
    .unwrap()
}

/// A small but nontrivial configuration for each experiment kind.
pub fn light_config(kind: ExperimentKind) -> ExperimentConfig {
    let model = hemi_model(1.5, 2, 2.0, 1.0);
    let scheme = json!({"steps": 32});
    let params = match kind {
        ExperimentKind::Sample => json!({"start": [0.0, 2.0], "t": 1.0, "n": 3000}),
        ExperimentKind::Survival => {
            json!({"starts": [[0.0, 4.0], [1.0, 8.0]], "t_grid": [0.5, 1.0, 2.0], "n": 3000})
        }
        ExperimentKind::ExponentTime => json!({"start": [0.0, 4.0], "t_grid": [0.5, 1.0, 2.0], "n": 3000}),
        ExperimentKind::ExponentSpace => {
            json!({"direction": [0.0, 1.0], "s_grid": [2.0, 4.0, 8.0], "t": 1.0, "n": 3000})
        }
        ExperimentKind::Factorization => json!({
            "x_list": [[0.0, 3.0], [0.5, 4.0]], "y_list": [[0.0, 3.5]], "t": 1.0, "n": 20000
        }),
        ExperimentKind::Overshoot => json!({
            "start": [0.0, 2.0], "t_max": 2.0, "n": 3000,
            "distance_edges": [0.1, 0.5, 2.0], "depth_bins": 5
        }),
        ExperimentKind::Yaglom => json!({
            "starts": [[0.0, 4.0], [0.0, 6.0]], "t_grid": [1.0, 2.0], "n": 3000,
            "window_lo": [-6.0, 0.0], "window_hi": [6.0, 12.0], "bins": [4, 4]
        }),
        ExperimentKind::Zolotarev => json!({"mc_samples": 2000}),
        ExperimentKind::BiasProbe => json!({"n": 2000}),
    };
    let mut c = config(model, half_plane(), scheme, params);
    c.master_seed = Some(20240611);
    c
}

pub fn files(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}
