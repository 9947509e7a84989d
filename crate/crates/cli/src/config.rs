//! JSON experiment configs. Unknown keys are rejected and missing keys are
//! reported with their path.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use meissner_core::constitutive::Kappa;
use meissner_core::discrete::GridSpec;
use meissner_core::exterior::Basis;
use meissner_core::interior::{DataSpec, SolveOptions};
use meissner_core::superheating::{ContinuationSchedule, System};

use crate::error::CliError;

fn infinite() -> Kappa {
    Kappa::INFINITY
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub geometry: GridSpec,
    pub lambda: f64,
    pub kappa: Kappa,
    #[serde(default = "unit")]
    pub mu: f64,
    pub data: DataSpec,
    #[serde(default)]
    pub options: SolveOptions,
    /// Start Newton from a seeded random state instead of the screening guess.
    #[serde(default)]
    pub random_init: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuationConfig {
    pub geometry: GridSpec,
    pub system: System,
    pub lambda: f64,
    #[serde(default = "infinite")]
    pub kappa: Kappa,
    pub data: DataSpec,
    #[serde(default)]
    pub schedule: ContinuationSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaSweepConfig {
    pub geometry: GridSpec,
    pub lambda: f64,
    pub data: DataSpec,
    pub kappas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSweepConfig {
    pub geometry: GridSpec,
    pub data: DataSpec,
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub schedule: ContinuationSchedule,
    #[serde(default)]
    pub liminf_kappa: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeValue {
    pub l: usize,
    pub m: i64,
    pub basis: Basis,
    pub value: f64,
}

fn default_radii() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0, 16.0]
}

fn default_direction() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

/// Decaying exterior potential for tangential data on a sphere, sampled
/// along a ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExteriorConfig {
    pub l_max: usize,
    pub sphere_radius: f64,
    #[serde(default)]
    pub flux: f64,
    pub trace: Vec<ModeValue>,
    /// Sample radii, in units of the sphere radius.
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_direction")]
    pub direction: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub b: f64,
    pub lambda: f64,
    #[serde(default = "infinite")]
    pub kappa: Kappa,
    #[serde(default)]
    pub length: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub film: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceConfig {}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Experiment {
    Solve(SolveConfig),
    Continuation(ContinuationConfig),
    KappaSweep(KappaSweepConfig),
    LambdaSweep(LambdaSweepConfig),
    Exterior(ExteriorConfig),
    Oracle(OracleConfig),
    Acceptance(AcceptanceConfig),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Solve(_) => "SOLVE",
            Experiment::Continuation(_) => "CONTINUATION",
            Experiment::KappaSweep(_) => "KAPPA_SWEEP",
            Experiment::LambdaSweep(_) => "LAMBDA_SWEEP",
            Experiment::Exterior(_) => "EXTERIOR",
            Experiment::Oracle(_) => "ORACLE",
            Experiment::Acceptance(_) => "ACCEPTANCE",
        }
    }
}

/// A parsed config: the experiment plus the keys shared by every kind.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

const KINDS: [&str; 7] = ["SOLVE", "CONTINUATION", "KAPPA_SWEEP", "LAMBDA_SWEEP", "EXTERIOR", "ORACLE", "ACCEPTANCE"];

fn typed<T: DeserializeOwned>(value: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let missing = inner.strip_prefix("missing field `").and_then(|r| r.split('`').next()).map(str::to_string);
        let field = match (path.as_str(), missing) {
            (".", Some(m)) => m,
            (p, Some(m)) => format!("{p}.{m}"),
            (p, None) => p.to_string(),
        };
        CliError::at(field, inner)
    })
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        RunConfig { experiment, seed: 0, out: None }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::config(format!("not valid JSON: {e}")))?;
        let Value::Object(mut map) = value else {
            return Err(CliError::config("config must be a JSON object"));
        };
        let kind = match map.remove("kind") {
            Some(Value::String(k)) => k,
            Some(_) => return Err(CliError::at("kind", "kind must be a string")),
            None => return Err(CliError::at("kind", "missing field `kind`")),
        };
        let seed = match map.remove("seed") {
            None => 0,
            Some(v) => v.as_u64().ok_or_else(|| CliError::at("seed", "seed must be a nonnegative integer"))?,
        };
        let out = match map.remove("out") {
            None => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => return Err(CliError::at("out", "out must be a string")),
        };
        let rest = Value::Object(map);
        let experiment = match kind.as_str() {
            "SOLVE" => Experiment::Solve(typed(rest)?),
            "CONTINUATION" => Experiment::Continuation(typed(rest)?),
            "KAPPA_SWEEP" => Experiment::KappaSweep(typed(rest)?),
            "LAMBDA_SWEEP" => Experiment::LambdaSweep(typed(rest)?),
            "EXTERIOR" => Experiment::Exterior(typed(rest)?),
            "ORACLE" => Experiment::Oracle(typed(rest)?),
            "ACCEPTANCE" => Experiment::Acceptance(typed(rest)?),
            other => return Err(CliError::at("kind", format!("unknown kind `{other}`, expected one of {}", KINDS.join(", ")))),
        };
        Ok(RunConfig { experiment, seed, out })
    }

    pub fn to_value(&self) -> Value {
        let mut map = match serde_json::to_value(&self.experiment).expect("configs serialize") {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        map.insert("seed".into(), self.seed.into());
        if let Some(out) = &self.out {
            map.insert("out".into(), Value::String(out.display().to_string()));
        }
        Value::Object(map)
    }

    /// Canonical JSON text; the config hash is taken over it.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("configs serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_example_parses_with_defaults() {
        let c = RunConfig::from_json(r#"{"kind":"ORACLE","b":0.5,"lambda":0.1}"#).unwrap();
        let Experiment::Oracle(o) = &c.experiment else { panic!("wrong kind") };
        assert_eq!((o.b, o.lambda, o.kappa, o.film), (0.5, 0.1, Kappa::INFINITY, false));
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn missing_field_reports_its_path() {
        let err = RunConfig::from_json(r#"{"kind":"ORACLE","b":0.5}"#).unwrap_err();
        assert!(matches!(&err, CliError::Config { field: Some(f), .. } if f == "lambda"), "{err:?}");
        let nested = r#"{"kind":"KAPPA_SWEEP","lambda":0.1,"kappas":[16,32],
            "geometry":{"dims":1,"extents":[10],"lengths":[1.0]},"data":{"shape":"ONE_SIDED","amplitude":0.3}}"#;
        let err = RunConfig::from_json(nested).unwrap_err();
        assert!(matches!(&err, CliError::Config { field: Some(f), .. } if f == "geometry.boundary"), "{err:?}");
    }

    #[test]
    fn unknown_keys_and_kinds_fail() {
        for text in [
            r#"{"kind":"ORACLE","b":0.5,"lambda":0.1,"extra":1}"#,
            r#"{"kind":"NOPE"}"#,
            r#"{"b":0.5}"#,
            r#"{"kind":"ACCEPTANCE","seed":-1}"#,
            "[1, 2]",
        ] {
            let err = RunConfig::from_json(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let text = r#"{"kind":"CONTINUATION","system":"FULL","lambda":0.1,"kappa":50.0,
            "geometry":{"dims":1,"extents":[400],"lengths":[1.5],"boundary":["WALL"]},
            "data":{"shape":"ONE_SIDED","amplitude":1.0},"seed":9,"out":"somewhere"}"#;
        let c = RunConfig::from_json(text).unwrap();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
