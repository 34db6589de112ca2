//! Model-file parsing and CSV/JSON writers.
//!
//! The model definition file is the single source of truth for every
//! command:
//!
//! ```json
//! {"rho": 1.0, "sigma": 1.0, "f": {"a0": 2.0, "a": [0.0], "b": [1.0]}}
//! ```
//!
//! JSON summaries are pretty-printed with sorted keys; CSV files carry a
//! header row. All numbers use shortest round-trip formatting, so reruns
//! with the same seed are byte-identical.

use crate::error::{Error, Result};
use crate::fourier::FourierFunction;
use crate::model::OscillatorModel;
use serde::Deserialize;
use serde_json::{Map, Value};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Deserialize)]
struct ModelFile {
    rho: f64,
    #[serde(default = "default_sigma")]
    sigma: f64,
    f: FourierFunction,
}

fn default_sigma() -> f64 {
    1.0
}

/// Parse a model definition file. Malformed JSON reports the parse
/// location; invalid parameters report which constraint failed.
pub fn load_model(path: &Path) -> Result<OscillatorModel> {
    let text = std::fs::read_to_string(path)?;
    let parsed: ModelFile = serde_json::from_str(&text).map_err(|e| {
        Error::InvalidModel(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    let f = FourierFunction::new(parsed.f.a0, parsed.f.a, parsed.f.b);
    OscillatorModel::new(parsed.rho, f, parsed.sigma)
}

pub fn model_to_value(m: &OscillatorModel) -> Value {
    let mut f = Map::new();
    f.insert("a0".into(), json_f64(m.base_coupling().a0));
    f.insert(
        "a".into(),
        Value::Array(m.base_coupling().a.iter().map(|&x| json_f64(x)).collect()),
    );
    f.insert(
        "b".into(),
        Value::Array(m.base_coupling().b.iter().map(|&x| json_f64(x)).collect()),
    );
    let mut out = Map::new();
    out.insert("rho".into(), json_f64(m.rho()));
    out.insert("sigma".into(), json_f64(m.sigma()));
    out.insert("f".into(), Value::Object(f));
    Value::Object(out)
}

pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Pretty-print with a trailing newline. `serde_json`'s default map is
/// ordered, so object keys come out sorted.
pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Density table: phi, p_st.
pub fn density_csv(d: &crate::density::DensityGrid) -> String {
    let mut out = String::from("phi,p_st\n");
    for (phi, p) in d.grid.nodes().zip(d.p.iter()) {
        let _ = writeln!(out, "{phi},{p}");
    }
    out
}

/// Ensemble trajectory table: t, phase_0..phase_{N-1}, max_pairwise_dist,
/// order_parameter.
pub fn trajectory_csv(snapshots: &[crate::dynamics::EnsembleSnapshot]) -> String {
    let members = snapshots.first().map_or(0, |s| s.phases.len());
    let mut out = String::from("t");
    for i in 0..members {
        let _ = write!(out, ",phase_{i}");
    }
    out.push_str(",max_pairwise_dist,order_parameter\n");
    for s in snapshots {
        let _ = write!(out, "{}", s.t);
        for p in &s.phases {
            let _ = write!(out, ",{p}");
        }
        let _ = writeln!(out, ",{},{}", s.max_pairwise_dist, s.order_parameter);
    }
    out
}

/// Sigma sweep table.
pub fn sweep_csv_header() -> &'static str {
    "sigma,lambda_quadrature,lambda_mc,lambda_mc_stderr,C,generic\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn loads_model_with_default_sigma() {
        let dir = std::env::temp_dir().join(format!("phaseosc-out-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.json");
        let mut file = std::fs::File::create(&path).unwrap();
        write!(file, r#"{{"rho": 2.0, "f": {{"a0": 1.0, "a": [], "b": [0.5]}}}}"#).unwrap();
        let m = load_model(&path).unwrap();
        assert_eq!(m.rho(), 2.0);
        assert_eq!(m.sigma(), 1.0);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn malformed_json_reports_location() {
        let dir = std::env::temp_dir().join(format!("phaseosc-out2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        std::fs::write(&path, "{\"rho\": 1.0,\n  broken").unwrap();
        let err = load_model(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "message: {msg}");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn json_keys_sorted() {
        let mut map = Map::new();
        map.insert("zeta".into(), Value::Null);
        map.insert("alpha".into(), Value::Null);
        let text = serde_json::to_string(&Value::Object(map)).unwrap();
        assert!(text.find("alpha").unwrap() < text.find("zeta").unwrap());
    }
}
