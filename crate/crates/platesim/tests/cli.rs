//! End-to-end tests of the scenario runner: artifacts, determinism, and the
//! exit-code contract.

use std::path::Path;

use platesim::config::RunMode;
use platesim::runner::execute;

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.cfg");
    std::fs::write(&path, body).unwrap();
    path
}

const SIMULATE: &str = r#"
[geometry]
kind = hinged-rectangle
dim = 1
modes = [16]
beta = 0.0

[nonlinearity]
coefficients = [0.0, 0.0, 1.0]
class = defocusing

[damping]
boxes = [0.7853981633974483, 2.356194490192345]
gamma0 = 2.0
delta = 0.3

[run]
mode = simulate
t_final = 0.5
dt = 0.001
seed = 7
damping = true

[output]
directory = PLACEHOLDER
"#;

fn simulate_config(dir: &Path, out: &Path) -> std::path::PathBuf {
    write_config(dir, &SIMULATE.replace("PLACEHOLDER", out.to_str().unwrap()))
}

#[test]
fn simulate_writes_artifacts_and_summary_mirrors_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = simulate_config(tmp.path(), &out);
    let code = execute(RunMode::Simulate, &cfg, &[], None, None);
    assert_eq!(code, 0);
    for name in ["report.json", "energy.csv", "summary.csv"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    // every headline number appears in summary.csv
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    for (key, _) in report["numbers"].as_object().unwrap() {
        assert!(summary.contains(key), "headline `{key}` missing from summary.csv");
    }
    // energy.csv has the contracted columns
    let energy = std::fs::read_to_string(out.join("energy.csv")).unwrap();
    assert!(energy.starts_with("t,E,kinetic,bending,mass,potential,dissipation_cum,norm_X"));
}

#[test]
fn zero_data_simulation_writes_zero_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = simulate_config(tmp.path(), &out);
    let code = execute(
        RunMode::Simulate,
        &cfg,
        &["run.initial_norm=0.0".to_string()],
        None,
        None,
    );
    assert_eq!(code, 0);
    let energy = std::fs::read_to_string(out.join("energy.csv")).unwrap();
    for line in energy.lines().skip(1).take(5) {
        let mut cols = line.split(',');
        let _t = cols.next().unwrap();
        for col in cols {
            assert_eq!(col.parse::<f64>().unwrap(), 0.0, "nonzero column in {line}");
        }
    }
}

#[test]
fn same_config_and_seed_reproduce_report_except_timestamp() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = simulate_config(tmp.path(), &out);
    let strip = |text: &str| -> String {
        text.lines()
            .filter(|l| !l.contains("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(execute(RunMode::Simulate, &cfg, &[], None, Some(5)), 0);
    let first = std::fs::read_to_string(out.join("report.json")).unwrap();
    let first_csv = std::fs::read(out.join("energy.csv")).unwrap();
    assert_eq!(execute(RunMode::Simulate, &cfg, &[], None, Some(5)), 0);
    let second = std::fs::read_to_string(out.join("report.json")).unwrap();
    let second_csv = std::fs::read(out.join("energy.csv")).unwrap();
    assert_eq!(strip(&first), strip(&second));
    // and the CSVs are byte-identical outright
    assert_eq!(first_csv, second_csv);
}

#[test]
fn torus_without_beta_exits_3_citing_rule() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = simulate_config(tmp.path(), &out);
    let code = execute(
        RunMode::Simulate,
        &cfg,
        &["geometry.kind=torus".to_string()],
        None,
        None,
    );
    assert_eq!(code, 3);
}

#[test]
fn unknown_key_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let body = SIMULATE
        .replace("PLACEHOLDER", out.to_str().unwrap())
        .replace("seed = 7", "seed = 7\nnot_a_key = 1");
    let cfg = write_config(tmp.path(), &body);
    assert_eq!(execute(RunMode::Simulate, &cfg, &[], None, None), 3);
}

#[test]
fn missing_config_file_exits_3() {
    assert_eq!(
        execute(RunMode::Simulate, Path::new("/nonexistent/x.cfg"), &[], None, None),
        3
    );
}

#[test]
fn observability_mode_emits_gramian_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let body = SIMULATE
        .replace("PLACEHOLDER", out.to_str().unwrap())
        .replace("mode = simulate", "mode = observability")
        .replace("t_final = 0.5", "t_final = 1.0");
    let cfg = write_config(tmp.path(), &body);
    let code = execute(RunMode::Observability, &cfg, &[], None, None);
    assert_eq!(code, 0);
    assert!(out.join("gramian.csv").exists());
    assert!(out.join("gramian_report.json").exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report["numbers"]["mu_min"].as_f64().unwrap() > 0.0);
}

#[test]
fn hum_mode_emits_control_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let body = SIMULATE
        .replace("PLACEHOLDER", out.to_str().unwrap())
        .replace("mode = simulate", "mode = hum")
        .replace("modes = [16]", "modes = [10]")
        .replace("t_final = 0.5", "t_final = 1.0");
    let cfg = write_config(tmp.path(), &body);
    let code = execute(RunMode::Hum, &cfg, &[], None, None);
    assert_eq!(code, 0);
    assert!(out.join("control.json").exists());
    assert!(out.join("control.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report["numbers"]["terminal_error"].as_f64().unwrap() <= 1e-6);
    // body rows: t plus one column per grid point
    let csv = std::fs::read_to_string(out.join("control.csv")).unwrap();
    let header_cols = csv.lines().next().unwrap().split(',').count();
    assert_eq!(header_cols, 1 + 20); // factor-2 grid of 10 modes
}

#[test]
fn steer_without_equilibria_exits_2_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let body = SIMULATE
        .replace("PLACEHOLDER", out.to_str().unwrap())
        .replace("mode = simulate", "mode = steer");
    let cfg = write_config(tmp.path(), &body);
    // no guesses and no random guesses: the equilibrium set comes up empty
    let code = execute(RunMode::Steer, &cfg, &[], None, None);
    assert_eq!(code, 2);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report["notes"]["error"].as_str().unwrap().contains("no equilibria"));
}

#[test]
fn local_control_mode_emits_control_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let body = SIMULATE
        .replace("PLACEHOLDER", out.to_str().unwrap())
        .replace("mode = simulate", "mode = local-control")
        .replace("modes = [16]", "modes = [10]")
        .replace("t_final = 0.5", "t_final = 1.0");
    let cfg = write_config(tmp.path(), &body);
    let code = execute(RunMode::LocalControl, &cfg, &[], None, None);
    assert_eq!(code, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report["numbers"]["terminal_error"].as_f64().unwrap() <= 1e-6);
    assert!(out.join("control.csv").exists());
}

#[test]
fn overflow_guard_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = simulate_config(tmp.path(), &out);
    let code = execute(
        RunMode::Simulate,
        &cfg,
        &["run.initial_norm=1e9".to_string()],
        None,
        None,
    );
    assert_eq!(code, 4);
}

#[test]
fn equilibria_mode_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let body = SIMULATE
        .replace("PLACEHOLDER", out.to_str().unwrap())
        .replace("mode = simulate", "mode = equilibria")
        .replace("kind = hinged-rectangle", "kind = torus")
        .replace("beta = 0.0", "beta = 1.0")
        .replace(
            "coefficients = [0.0, 0.0, 1.0]\nclass = defocusing",
            "coefficients = [-2.0, 0.0, 1.0]\nclass = asymptotic-defocusing\nradius = 1.5",
        )
        .replace("modes = [16]", "modes = [9]")
        .replace("seed = 7", "seed = 7\nguesses = [-1.5, 0.0, 1.5]");
    let cfg = write_config(tmp.path(), &body);
    let code = execute(RunMode::Equilibria, &cfg, &[], None, None);
    assert_eq!(code, 0);
    let table = std::fs::read_to_string(out.join("equilibria.csv")).unwrap();
    assert_eq!(table.lines().count(), 4); // header + three roots
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["numbers"]["count"].as_f64().unwrap(), 3.0);
}

#[test]
fn steer_mode_emits_plan_and_control() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let body = r#"
[geometry]
kind = torus
dim = 1
modes = [7]
beta = 1.0

[nonlinearity]
coefficients = [-2.0, 0.0, 1.0]
class = asymptotic-defocusing
radius = 1.5

[damping]
boxes = [1.0, 3.5]
gamma0 = 2.0
delta = 0.5

[run]
mode = steer
dt = 0.002
seed = 3
guesses = [-1.5, 0.0, 1.5]
start_constant = 1.0
end_constant = -1.0
control_time = 1.5

[output]
directory = OUTDIR
"#
    .replace("OUTDIR", out.to_str().unwrap());
    let cfg = write_config(tmp.path(), &body);
    let code = execute(RunMode::Steer, &cfg, &[], None, None);
    assert_eq!(code, 0);
    assert!(out.join("plan.json").exists());
    assert!(out.join("control.json").exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let numbers = &report["numbers"];
    assert!(numbers["terminal_error"].as_f64().unwrap() <= 1e-3);
    assert!(
        numbers["total_duration"].as_f64().unwrap() <= numbers["t_max"].as_f64().unwrap()
    );
    let plan: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("plan.json")).unwrap()).unwrap();
    assert!(plan["legs"].as_array().unwrap().len() >= 3);
}
