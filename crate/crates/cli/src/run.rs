//! Experiment dispatch and artifact writing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use meissner_core::constitutive::GLParameters;
use meissner_core::discrete::{build_grid, Placement, ScalarField, StaggeredGrid, VectorField, VectorPlacement};
use meissner_core::exterior::{sigma_dtn, solve_exterior_scalar, SphericalHarmonicCoeffs};
use meissner_core::interior::{discrete_energy, recover_a, solve_full_fh, solve_limit_h, BoundaryData, DataSpec};
use meissner_core::oned::{solve_full_ode, solve_limit_ode, SlabProblem};
use meissner_core::superheating::{continue_mu, kappa_sweep, lambda_sweep, ContinuationSchedule};

use crate::acceptance;
use crate::config::{
    ContinuationConfig, Experiment, ExteriorConfig, KappaSweepConfig, LambdaSweepConfig, OracleConfig, RunConfig, SolveConfig,
};
use crate::error::CliError;
use crate::plot::{emit_plot, PlotSpec};
use crate::table::{Cell, Provenance, ResultsTable};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "MEISSNER_LAB_OUT";
const DEFAULT_OUT: &str = "meissner-out";

pub enum Output {
    Table(ResultsTable),
    Text(String),
}

/// Everything a run produces, held in memory until a single write pass.
pub struct Artifacts {
    pub summary: Value,
    pub files: Vec<(String, Output)>,
    /// Set when the run itself worked but its checks did not pass.
    pub failure: Option<String>,
}

impl Artifacts {
    fn new(summary: Value) -> Self {
        Artifacts { summary, files: Vec::new(), failure: None }
    }

    fn table(mut self, name: &str, csv: &str) -> Result<Self, CliError> {
        self.files.push((name.to_string(), Output::Table(ResultsTable::from_csv(csv)?)));
        Ok(self)
    }

    fn text(mut self, name: &str, body: String) -> Self {
        self.files.push((name.to_string(), Output::Text(body)));
        self
    }

    fn plot(self, name: &str, csv: &str, spec: &PlotSpec) -> Result<Self, CliError> {
        let svg = emit_plot(&ResultsTable::from_csv(csv)?, spec)?;
        Ok(self.text(name, svg))
    }

    fn stamp(&mut self, provenance: &Provenance) {
        for (_, out) in &mut self.files {
            if let Output::Table(t) = out {
                t.provenance = Some(provenance.clone());
            }
        }
        if let Value::Object(m) = &mut self.summary {
            m.insert("provenance".into(), serde_json::to_value(provenance).expect("provenance serializes"));
        }
    }
}

/// `--out`, then the config's `out`, then the environment, then a local default.
pub fn resolve_out_dir(cli: Option<&Path>, config: &RunConfig) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| config.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn grid_and_data(geometry: &meissner_core::discrete::GridSpec, data: &DataSpec) -> Result<(StaggeredGrid, BoundaryData), CliError> {
    let grid = build_grid(geometry).map_err(|e| CliError::at("geometry", e.to_string()))?;
    let data = BoundaryData::from_spec(grid, data).map_err(|e| CliError::at("data", e.to_string()))?;
    Ok((grid, data))
}

fn oracle_problem(c: &OracleConfig) -> SlabProblem {
    let mut p = SlabProblem::half_space(c.lambda, c.kappa, c.b);
    p.film = c.film;
    if let Some(l) = c.length {
        p.length = l;
    }
    if let Some(n) = c.n {
        p.n = n;
    }
    p
}

fn check_schedule(s: &ContinuationSchedule) -> Result<(), CliError> {
    s.validate().map_err(|e| CliError::at("schedule", e.to_string()))
}

/// Module preconditions checked before any solve starts.
pub fn validate(config: &RunConfig) -> Result<(), CliError> {
    match &config.experiment {
        Experiment::Solve(c) => {
            grid_and_data(&c.geometry, &c.data)?;
            GLParameters::new(c.lambda, c.kappa, c.mu)?;
            if c.random_init && c.kappa.is_infinite() {
                return Err(CliError::at("random_init", "random starts need a finite kappa"));
            }
        }
        Experiment::Continuation(c) => {
            grid_and_data(&c.geometry, &c.data)?;
            check_schedule(&c.schedule)?;
            GLParameters::new(c.lambda, c.kappa, 0.0)?;
        }
        Experiment::KappaSweep(c) => {
            grid_and_data(&c.geometry, &c.data)?;
            GLParameters::limit(c.lambda, 0.0)?;
            if c.kappas.len() < 2 || c.kappas.windows(2).any(|w| w[1] <= w[0]) || c.kappas.iter().any(|k| *k < 1.0) {
                return Err(CliError::at("kappas", "need at least two increasing kappas, each at least 1"));
            }
        }
        Experiment::LambdaSweep(c) => {
            grid_and_data(&c.geometry, &c.data)?;
            check_schedule(&c.schedule)?;
            if c.lambdas.is_empty() || c.lambdas.windows(2).any(|w| w[1] >= w[0]) || c.lambdas.iter().any(|l| *l <= 0.0) {
                return Err(CliError::at("lambdas", "lambdas must be positive and strictly decreasing"));
            }
        }
        Experiment::Exterior(c) => {
            exterior_trace(c)?;
            if c.radii.iter().any(|r| *r < 1.0) {
                return Err(CliError::at("radii", "sample radii must lie on or outside the sphere"));
            }
            if c.direction.iter().map(|d| d * d).sum::<f64>() == 0.0 {
                return Err(CliError::at("direction", "direction must be nonzero"));
            }
        }
        Experiment::Oracle(c) => oracle_problem(c).validate()?,
        Experiment::Acceptance(_) => {}
    }
    Ok(())
}

/// Run the experiment and collect its artifacts without touching the disk.
pub fn execute(config: &RunConfig, jobs: usize) -> Result<Artifacts, CliError> {
    validate(config)?;
    let start = Instant::now();
    let mut artifacts = match &config.experiment {
        Experiment::Solve(c) => solve(c, config.seed)?,
        Experiment::Continuation(c) => continuation(c)?,
        Experiment::KappaSweep(c) => kappa(c, jobs)?,
        Experiment::LambdaSweep(c) => lambda(c, jobs)?,
        Experiment::Exterior(c) => exterior(c)?,
        Experiment::Oracle(c) => oracle(c)?,
        Experiment::Acceptance(_) => acceptance_run(config.seed, jobs)?,
    };
    let hashed = RunConfig { out: None, ..config.clone() };
    artifacts.stamp(&Provenance::new(&hashed.to_json(), start.elapsed().as_secs_f64()));
    Ok(artifacts)
}

/// Write every artifact into `dir` plus `summary.json`; returns the paths.
pub fn write_artifacts(dir: &Path, artifacts: &Artifacts) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    let summary = serde_json::to_string_pretty(&artifacts.summary).expect("summary serializes") + "\n";
    let files = artifacts.files.iter().map(|(name, out)| {
        let body = match out {
            Output::Table(t) => t.to_csv(),
            Output::Text(s) => s.clone(),
        };
        (name.as_str(), body)
    });
    for (name, body) in files.chain(std::iter::once(("summary.json", summary))) {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn random_start(grid: StaggeredGrid, seed: u64) -> Result<(ScalarField, VectorField), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len(Placement::Node)).map(|_| rng.gen_range(0.85..1.0)).collect();
    let f = ScalarField::new(grid, Placement::Node, values)?;
    let flat: Vec<f64> = (0..grid.component_offsets(true)[3]).map(|_| rng.gen_range(-0.2..0.2)).collect();
    Ok((f, VectorField::from_flat(grid, VectorPlacement::Face, &flat)?))
}

fn solve(c: &SolveConfig, seed: u64) -> Result<Artifacts, CliError> {
    let (grid, data) = grid_and_data(&c.geometry, &c.data)?;
    let data = data.scaled(c.mu);
    let params = GLParameters::new(c.lambda, c.kappa, c.mu)?;
    let (state, report) = if c.kappa.is_infinite() {
        solve_limit_h(&params, &data, &grid, None, &c.options)?
    } else if c.random_init {
        let (f, a) = random_start(grid, seed)?;
        solve_full_fh(&params, &data, &grid, Some((&f, &a)), &c.options)?
    } else {
        solve_full_fh(&params, &data, &grid, None, &c.options)?
    };
    let potential = recover_a(&state)?;
    let summary = json!({
        "kind": "SOLVE",
        "state": state.sidecar(&report),
        "energy": discrete_energy(&potential)?,
        "margin": potential.margin,
    });
    Artifacts::new(summary).table("state.csv", &state.to_csv())
}

fn continuation(c: &ContinuationConfig) -> Result<Artifacts, CliError> {
    let (grid, data) = grid_and_data(&c.geometry, &c.data)?;
    let r = continue_mu(c.system, c.lambda, c.kappa, &data, &c.schedule, &grid)?;
    let csv = r.to_csv();
    let spec = continuation_plot(r.mu_star);
    Artifacts::new(json!({ "kind": "CONTINUATION", "result": r.summary() }))
        .table("continuation.csv", &csv)?
        .plot("continuation.svg", &csv, &spec)
}

pub(crate) fn continuation_plot(mu_star: f64) -> PlotSpec {
    PlotSpec {
        x: "mu".into(),
        y: vec!["margin".into()],
        log_x: false,
        log_y: false,
        title: Some("convexity margin along the continuation".into()),
        reference_slope: None,
        marker_x: Some(mu_star),
        marker_label: Some(format!("mu* = {mu_star:.5}")),
    }
}

pub(crate) fn rate_plot() -> PlotSpec {
    PlotSpec {
        x: "kappa".into(),
        y: vec!["l2_f".into(), "l2_A".into()],
        log_x: true,
        log_y: true,
        title: Some("distance to the limiting state".into()),
        reference_slope: Some(-1.5),
        marker_x: None,
        marker_label: None,
    }
}

fn kappa(c: &KappaSweepConfig, jobs: usize) -> Result<Artifacts, CliError> {
    let (grid, data) = grid_and_data(&c.geometry, &c.data)?;
    let fit = kappa_sweep(c.lambda, &data, &grid, &c.kappas, jobs)?;
    let csv = fit.to_csv();
    Artifacts::new(json!({ "kind": "KAPPA_SWEEP", "result": fit }))
        .table("kappa_sweep.csv", &csv)?
        .plot("kappa_sweep.svg", &csv, &rate_plot())
}

fn lambda(c: &LambdaSweepConfig, jobs: usize) -> Result<Artifacts, CliError> {
    let (grid, data) = grid_and_data(&c.geometry, &c.data)?;
    let sweep = lambda_sweep(&data, &grid, &c.lambdas, &c.schedule, c.liminf_kappa, jobs)?;
    let csv = sweep.to_csv();
    let spec = PlotSpec {
        x: "lambda".into(),
        y: vec!["error".into()],
        log_x: true,
        log_y: true,
        title: Some("threshold error against the limiting value".into()),
        reference_slope: None,
        marker_x: None,
        marker_label: None,
    };
    let plot = emit_plot(&ResultsTable::from_csv(&csv)?, &spec);
    let artifacts = Artifacts::new(json!({ "kind": "LAMBDA_SWEEP", "result": sweep })).table("lambda_sweep.csv", &csv)?;
    // Errors can vanish exactly, which a log axis cannot show.
    Ok(match plot {
        Ok(svg) => artifacts.text("lambda_sweep.svg", svg),
        Err(_) => artifacts,
    })
}

fn exterior_trace(c: &ExteriorConfig) -> Result<SphericalHarmonicCoeffs, CliError> {
    let mut v = SphericalHarmonicCoeffs::zeros(c.l_max, c.sphere_radius).map_err(|e| CliError::at("sphere_radius", e.to_string()))?;
    for (i, mode) in c.trace.iter().enumerate() {
        v.set(mode.l, mode.m, mode.basis, mode.value).map_err(|e| CliError::at(format!("trace[{i}]"), e.to_string()))?;
    }
    Ok(v)
}

fn exterior(c: &ExteriorConfig) -> Result<Artifacts, CliError> {
    let v = exterior_trace(c)?;
    let sol = solve_exterior_scalar(&v, c.flux, c.sphere_radius)?;
    let sigma = sigma_dtn(&v)?;
    let norm = c.direction.iter().map(|d| d * d).sum::<f64>().sqrt();
    let mut profile = ResultsTable::new(["r", "phi", "grad_norm"]);
    for s in &c.radii {
        let r = s * c.sphere_radius;
        let x = c.direction.map(|d| d / norm * r);
        let g = sol.gradient(x)?;
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        profile.push(vec![Cell::Float(r), Cell::Float(sol.value(x)?), Cell::Float(gn)])?;
    }
    let summary = json!({ "kind": "EXTERIOR", "flux": sol.flux, "l_max": c.l_max, "sphere_radius": c.sphere_radius });
    let mut a = Artifacts::new(summary).table("exterior_potential.csv", &sol.coeffs.to_csv())?.table("exterior_normal_trace.csv", &sigma.to_csv())?;
    a.files.push(("exterior_profile.csv".into(), Output::Table(profile)));
    Ok(a)
}

fn oracle(c: &OracleConfig) -> Result<Artifacts, CliError> {
    let p = oracle_problem(c);
    let sol = if p.kappa.is_infinite() { solve_limit_ode(&p)? } else { solve_full_ode(&p, false)? };
    let summary = serde_json::to_value(sol.summary()).expect("summary serializes");
    Artifacts::new(summary).table("oracle_profile.csv", &sol.to_csv())
}

fn acceptance_run(seed: u64, jobs: usize) -> Result<Artifacts, CliError> {
    let report = acceptance::run_suite(seed, jobs);
    let mut table = ResultsTable::new(["criterion", "title", "passed", "detail"]);
    for c in &report.criteria {
        table.push(vec![
            Cell::Int(c.id as i64),
            Cell::Text(c.title.to_string()),
            Cell::Text(c.passed.to_string()),
            Cell::Text(c.detail.clone()),
        ])?;
    }
    let failed: Vec<String> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id.to_string()).collect();
    let summary = json!({
        "kind": "ACCEPTANCE",
        "passed": failed.is_empty(),
        "criteria": report.criteria.iter().map(|c| json!({"id": c.id, "title": c.title, "passed": c.passed, "detail": c.detail, "seconds": c.seconds})).collect::<Vec<_>>(),
    });
    let mut a = Artifacts::new(summary);
    a.files.push(("acceptance.csv".into(), Output::Table(table)));
    for (name, t) in report.tables {
        a.files.push((format!("{name}.csv"), Output::Table(t)));
    }
    for (name, svg) in report.plots {
        a.files.push((format!("{name}.svg"), Output::Text(svg)));
    }
    if !failed.is_empty() {
        a.failure = Some(format!("criteria {} failed", failed.join(", ")));
    }
    Ok(a)
}
