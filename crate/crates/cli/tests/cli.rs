use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_meissner-lab");

fn run(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("MEISSNER_LAB_OUT");
    if let Some(dir) = env_out {
        cmd.env("MEISSNER_LAB_OUT", dir);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn error_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error JSON on stderr")
}

fn body(path: &Path) -> String {
    meissner_lab::table::csv_body(&std::fs::read_to_string(path).unwrap())
}

#[test]
fn oracle_config_reports_the_wall_potential() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "oracle.json", r#"{"kind":"ORACLE","b":0.5,"lambda":0.1}"#);
    let out_dir = dir.path().join("out");
    let out = run(&["run", &cfg, "--out", out_dir.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((summary["a0"].as_f64().unwrap() - 0.54120).abs() < 5e-5, "{summary}");
    let csv = std::fs::read_to_string(out_dir.join("oracle_profile.csv")).unwrap();
    assert!(csv.starts_with("# config_hash: "));
    assert!(csv.lines().nth(3).unwrap() == "x,f,a,fp,ap");
    assert!(out_dir.join("summary.json").exists());
}

#[test]
fn missing_field_exits_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"kind":"ORACLE","b":0.5}"#);
    let out = run(&["run", &cfg], Some(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    let err = error_json(&out);
    assert_eq!(err["error"], "CONFIG_INVALID");
    assert_eq!(err["field"], "lambda");
    assert_eq!(err["exit_code"], 2);
}

#[test]
fn out_of_range_parameters_fail_before_solving() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "big.json", r#"{"kind":"ORACLE","b":0.5,"lambda":0.1,"n":10}"#);
    let out = run(&["run", &cfg], Some(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("summary.json").exists());
}

#[test]
fn exhausted_continuation_is_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cont.json",
        r#"{"kind":"CONTINUATION","system":"LIMIT","lambda":0.1,
            "geometry":{"dims":1,"extents":[100],"lengths":[1.5],"boundary":["WALL"]},
            "data":{"shape":"ONE_SIDED","amplitude":1.0},
            "schedule":{"max_steps":2}}"#,
    );
    let out = run(&["run", &cfg], Some(dir.path()));
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_json(&out)["error"], "SOLVER_FAILURE");
}

#[test]
fn environment_sets_the_output_root_and_runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"kind":"KAPPA_SWEEP","lambda":0.1,"kappas":[16,32,64],
            "geometry":{"dims":1,"extents":[600],"lengths":[0.5],"boundary":["WALL"]},
            "data":{"shape":"ONE_SIDED","amplitude":0.3}}"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&["run", &cfg, "--jobs", "1"], Some(&a)).status.code(), Some(0));
    assert_eq!(run(&["run", &cfg, "--jobs", "3"], Some(&b)).status.code(), Some(0));
    assert_eq!(body(&a.join("kappa_sweep.csv")), body(&b.join("kappa_sweep.csv")));
    let svg = std::fs::read(a.join("kappa_sweep.svg")).unwrap();
    assert_eq!(svg, std::fs::read(b.join("kappa_sweep.svg")).unwrap());
    assert!(String::from_utf8(svg).unwrap().contains("slope -1.50"));
}

#[test]
fn continuation_run_writes_table_plot_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cont.json",
        r#"{"kind":"CONTINUATION","system":"LIMIT","lambda":0.05,"seed":3,
            "geometry":{"dims":1,"extents":[300],"lengths":[0.5],"boundary":["WALL"]},
            "data":{"shape":"ONE_SIDED","amplitude":1.0},
            "schedule":{"mu_tol":1e-3}}"#,
    );
    let out = run(&["run", &cfg, "--out", dir.path().join("o").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    let mu_star = summary["result"]["mu_star"].as_f64().unwrap();
    assert!((mu_star - 0.527).abs() < 5e-3, "{mu_star}");
    assert_eq!(summary["provenance"]["code_version"], "meissner-lab 0.1.0");
    let svg = std::fs::read_to_string(dir.path().join("o/continuation.svg")).unwrap();
    assert!(svg.contains("mu* = "));
}

#[test]
fn solve_and_exterior_runs_produce_tables() {
    let dir = tempfile::tempdir().unwrap();
    let solve = write(
        dir.path(),
        "solve.json",
        r#"{"kind":"SOLVE","lambda":0.1,"kappa":50,"random_init":true,"seed":4,
            "geometry":{"dims":1,"extents":[64],"lengths":[0.5],"boundary":["WALL"]},
            "data":{"shape":"UNIFORM","amplitude":0.3,"direction":[0,1,0]}}"#,
    );
    let out = run(&["run", &solve], Some(&dir.path().join("s")));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["state"]["report"]["converged"], true);
    assert!(body(&dir.path().join("s/state.csv")).starts_with("placement,axis,i,j,k,value\n"));

    let ext = write(
        dir.path(),
        "ext.json",
        r#"{"kind":"EXTERIOR","l_max":4,"sphere_radius":1.0,"flux":0.5,
            "trace":[{"l":2,"m":1,"basis":"GRAD_S","value":1.0}]}"#,
    );
    let out = run(&["run", &ext], Some(&dir.path().join("e")));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(body(&dir.path().join("e/exterior_normal_trace.csv")), "l,m,basis,value\n2,1,Y,-3\n");

    let cross = write(
        dir.path(),
        "cross.json",
        r#"{"kind":"EXTERIOR","l_max":4,"sphere_radius":1.0,"trace":[{"l":1,"m":0,"basis":"CROSS","value":1.0}]}"#,
    );
    assert_eq!(run(&["run", &cross], Some(dir.path())).status.code(), Some(2));
}

#[test]
fn plot_command_renders_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let table = write(dir.path(), "t.csv", "# config_hash: x\nkappa,err\n16,0.01\n32,0.0035\n");
    let spec = write(dir.path(), "p.json", r#"{"x":"kappa","y":["err"],"log_x":true,"log_y":true,"reference_slope":-1.5}"#);
    let first = run(&["plot", &table, &spec], None);
    assert_eq!(first.status.code(), Some(0));
    assert!(first.stdout.starts_with(b"<svg"));
    assert_eq!(first.stdout, run(&["plot", &table, &spec], None).stdout);

    let missing = write(dir.path(), "m.json", r#"{"x":"kappa","y":["nope"]}"#);
    let out = run(&["plot", &table, &missing], None);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["field"], "nope");

    let zero = write(dir.path(), "z.csv", "kappa,err\n16,0\n");
    let out = run(&["plot", &zero, &spec], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_json(&out)["message"].as_str().unwrap().contains("non-positive"));

    let empty = write(dir.path(), "e.csv", "kappa,err\n");
    let out = run(&["plot", &empty, &spec], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(!String::from_utf8(out.stdout).unwrap().contains("<polyline"));
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        if path.file_name().unwrap() == "rate_plot.json" {
            serde_json::from_str::<meissner_lab::plot::PlotSpec>(&text).unwrap();
            continue;
        }
        let cfg = meissner_lab::config::RunConfig::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        meissner_lab::run::validate(&cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert_eq!(seen, 8);
}
