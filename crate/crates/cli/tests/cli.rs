use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

struct Run {
    code: i32,
    stderr: String,
    out: PathBuf,
}

fn run(cmd: &str, config: &str, extra: &[&str], dir: &TempDir, tag: &str) -> Run {
    let cfg = dir.path().join(format!("{tag}.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.path().join(tag);
    let res = Command::new(env!("CARGO_BIN_EXE_viscosity"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    Run {
        code: res.status.code().unwrap(),
        stderr: String::from_utf8_lossy(&res.stderr).into_owned(),
        out,
    }
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Rows of a CSV file, header dropped.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn algebraic_operator_reproduces_its_data() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "operator": {"kind": "expr", "expr": "r - (x^2 + y)", "gamma": 1},
        "grid": {"lo": [0, 0], "hi": [1, 1], "n": [9, 9]},
        "boundary": {"default": {"type": "dirichlet", "data": "x^2 + y"}}
    }"#;
    let r = run("solve", cfg, &[], &dir, "zero");
    assert_eq!(r.code, 0, "{}", r.stderr);
    for row in rows(&r.out.join("solution.csv")) {
        let want = row[0] * row[0] + row[1];
        assert!((row[2] - want).abs() < 1e-12, "{row:?}");
    }
    let s = json(&r.out.join("summary.json"));
    assert_eq!(s["converged"], true);
}

const NEUMANN: &str = r#"{
    "operator": {"kind": "expr", "expr": "-0.01*X + p + r - x - 1", "gamma": 1},
    "grid": {"lo": [0], "hi": [1], "n": [201]},
    "boundary": {"default": {"type": "neumann"}},
    "scheme": {"method": "newton", "residual_tol": 1e-10},
    "convergence": {"oracle": "neumann-exact", "eps": 0.01, "refinements": 2}
}"#;

#[test]
fn neumann_problem_converges() {
    let dir = TempDir::new().unwrap();
    let r = run("solve", NEUMANN, &[], &dir, "neu");
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = json(&r.out.join("summary.json"));
    assert!(s["residual"].as_f64().unwrap() <= 1e-8);
    let log = rows(&r.out.join("iterations.csv"));
    let last = log.last().unwrap();
    assert_eq!(last[0] as u64, s["iters"].as_u64().unwrap());
    assert_eq!(last[1], s["residual"].as_f64().unwrap());
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let dir = TempDir::new().unwrap();
    let cfg = NEUMANN.replace("\"newton\"", "\"jacobi\", \"max_iter\": 3");
    let r = run("solve", &cfg, &[], &dir, "cap");
    assert_eq!(r.code, 2);
    assert_eq!(json(&r.out.join("summary.json"))["converged"], false);
}

#[test]
fn convergence_table_halves_the_error() {
    let dir = TempDir::new().unwrap();
    let r = run("convergence", NEUMANN, &[], &dir, "conv");
    assert_eq!(r.code, 0, "{}", r.stderr);
    let t = rows(&r.out.join("convergence.csv"));
    assert_eq!(t.iter().map(|r| r[0] as usize).collect::<Vec<_>>(), [201, 401, 801]);
    for w in t.windows(2) {
        assert!((w[0][1] / w[1][1] - 2.0).abs() < 1e-9);
        assert!((w[1][3] - 2.0).abs() < 0.2, "ratio {}", w[1][3]);
    }
    assert_eq!(json(&r.out.join("summary.json"))["monotone"], true);
}

#[test]
fn malformed_configs_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let r = run("solve", r#"{"grid": {"lo": [0], "hi": [1], "n": [5]}, "bogus": 1}"#, &[], &dir, "a");
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("bogus") && r.stderr.contains("line 1"), "{}", r.stderr);
    let r = run("solve", "{\"grid\": {\"lo\": [0],\n \"hi\": [1], \"n\": 5}}", &[], &dir, "b");
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("line 2"), "{}", r.stderr);
    let cfg = r#"{"operator": {"kind": "expr", "expr": "q + 1"}, "grid": {"lo": [0], "hi": [1], "n": [5]}}"#;
    let r = run("solve", cfg, &[], &dir, "c");
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("unknown variable 'q'"), "{}", r.stderr);
    let cfg = r#"{"operator": {"kind": "catalog", "id": "nope"}, "grid": {"lo": [0], "hi": [1], "n": [5]}}"#;
    assert_eq!(run("solve", cfg, &[], &dir, "d").code, 1);
    let r = run("flow", r#"{"grid": {"lo": [0], "hi": [1], "n": [5]}}"#, &[], &dir, "e");
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("'flow'"), "{}", r.stderr);
}

fn eikonal_certify(function: &str, side: &str, expr: &str) -> String {
    format!(
        r#"{{
        "operator": {{"kind": "expr", "expr": "{expr}", "first_order": true}},
        "grid": {{"lo": [-1], "hi": [1], "n": [101]}},
        "certify": {{"function": "{function}", "side": "{side}"}}
    }}"#
    )
}

#[test]
fn certify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let r = run("certify", &eikonal_certify("-abs(x)", "solution", "p^2 - 1"), &[], &dir, "kink");
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(json(&r.out.join("summary.json"))["passed"], true);

    let r = run("certify", &eikonal_certify("abs(x)", "super", "p^2 - 1"), &[], &dir, "wrong");
    assert_eq!(r.code, 3);
    let fails = fs::read_to_string(r.out.join("failures.csv")).unwrap();
    assert!(fails.lines().skip(1).any(|l| l.starts_with("50,")), "{fails}");

    let r = run("certify", &eikonal_certify("2", "solution", "r - 2"), &[], &dir, "const");
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn static_flow_is_bit_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "operator": {"kind": "expr", "expr": "0"},
        "grid": {"lo": [-1, -1], "hi": [1, 1], "n": [11, 11]},
        "flow": {"initial": "sin(3*x) * y", "t_end": 0.1, "dt": {"fixed": 0.01}, "snapshots": [0.05]}
    }"#;
    let r = run("flow", cfg, &[], &dir, "still");
    assert_eq!(r.code, 0, "{}", r.stderr);
    let first = fs::read_to_string(r.out.join("snapshot_000.csv")).unwrap();
    for k in 1..3 {
        assert_eq!(fs::read_to_string(r.out.join(format!("snapshot_{k:03}.csv"))).unwrap(), first);
    }
}

#[test]
fn shrinking_circle_radii() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "operator": {"kind": "mean-curvature"},
        "grid": {"lo": [-1.2, -1.2], "hi": [1.2, 1.2], "n": [81, 81]},
        "flow": {"initial": "sqrt(x^2 + y^2) - 0.8", "t_end": 0.05, "dt": {"cfl": 0.5}, "snapshots": [0.025]}
    }"#;
    let r = run("flow", cfg, &[], &dir, "mcf");
    assert_eq!(r.code, 0, "{}", r.stderr);
    let table = rows(&r.out.join("summary.csv"));
    assert_eq!(table.len(), 3);
    for row in &table {
        let exact = (0.64 - 2.0 * row[0]).sqrt();
        assert!((row[3] - exact).abs() < 0.03, "t {} radius {} exact {exact}", row[0], row[3]);
    }
    let s = json(&r.out.join("summary.json"));
    assert_eq!(s["states"].as_array().unwrap().len(), 3);
}

#[test]
fn unstable_time_step_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "operator": {"kind": "catalog", "id": "linear"},
        "grid": {"lo": [0], "hi": [1], "n": [21]},
        "flow": {"initial": "sin(pi*x)", "t_end": 0.1, "dt": {"fixed": 0.1}}
    }"#;
    let r = run("flow", cfg, &[], &dir, "cfl");
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("stability bound"), "{}", r.stderr);
}

#[test]
fn doubling_chain_holds_for_a_concave_cap() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "grid": {"lo": [-1], "hi": [1], "n": [201]},
        "doubling": {"u": "1 - x^2", "v": "0", "alphas": [1, 2, 4, 8, 16, 32]}
    }"#;
    let r = run("doubling", cfg, &[], &dir, "dbl");
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(rows(&r.out.join("doubling.csv")).len(), 6);
    let chain = json(&r.out.join("summary.json"));
    for link in chain.as_array().unwrap() {
        assert_eq!(link["monotone"], true);
        assert_eq!(link["full_bound"], true);
    }
}

#[test]
fn supconv_reports_per_lambda() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"grid": {"lo": [-2], "hi": [2], "n": [201]}, "supconv": {"pieces": 5, "lambda": [1, 4]}}"#;
    let r = run("supconv", cfg, &["--seed", "7"], &dir, "sc");
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = json(&r.out.join("summary.json"));
    for entry in s.as_array().unwrap() {
        assert_eq!(entry["dominates_source"], true);
        assert_eq!(entry["midpoint_convex"], true);
    }
    let c1 = rows(&r.out.join("convolution_00.csv"));
    let c4 = rows(&r.out.join("convolution_01.csv"));
    for (a, b) in c1.iter().zip(&c4) {
        assert!(a[2] >= a[1] && a[2] >= b[2], "{a:?} {b:?}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "operator": {"kind": "catalog", "id": "hjb"},
        "grid": {"lo": [-1, -1], "hi": [1, 1], "n": [17, 17]},
        "seed": 11
    }"#;
    let a = run("solve", cfg, &[], &dir, "a");
    let b = run("solve", cfg, &["--threads", "1"], &dir, "b");
    assert_eq!(a.code, b.code);
    for f in ["solution.csv", "iterations.csv", "summary.json"] {
        assert_eq!(fs::read(a.out.join(f)).unwrap(), fs::read(b.out.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn eikonal_convergence_is_first_order() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "operator": {"kind": "expr", "expr": "r + abs(p) - 1", "first_order": true, "gamma": 1},
        "grid": {"lo": [-1], "hi": [1], "n": [101]},
        "convergence": {"oracle": "eikonal-plus-u", "refinements": 2}
    }"#;
    let r = run("convergence", cfg, &[], &dir, "eik");
    assert_eq!(r.code, 0, "{}", r.stderr);
    for row in rows(&r.out.join("convergence.csv")) {
        assert!(row[2] <= 5.0 * row[1], "error {} at h {}", row[2], row[1]);
    }
    assert_eq!(json(&r.out.join("summary.json"))["monotone"], true);
}
