use std::path::Path;
use std::process::{Command, Output};

use hypercurv::surface::shapes::{icosphere, torus_mesh};
use serde_json::Value;

fn hypercurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypercurv"))
        .args(args)
        .env_remove("HYPERCURV_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn validate(report: &Value) {
    let schema: Value = serde_json::from_str(hypercurv_cli::REPORT_SCHEMA).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(report) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("report violates schema:\n{}", msgs.join("\n"));
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn find_verdict<'a>(surface: &'a Value, classifier: &str) -> &'a Value {
    surface["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["classifier"] == classifier)
        .expect("verdict present")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn classify_self_shrinker_sphere() {
    let out = hypercurv(&["classify", "--shape", "sphere", "--radius", "2", "--dim", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    validate(&report);
    let s = &report["surfaces"][0];
    assert_eq!(find_verdict(s, "self-shrinker")["label"], "self-shrinker");
    let sphere = find_verdict(s, "sphere");
    assert_eq!(sphere["label"], "round-sphere");
    assert!((num(&sphere["params"]["radius"]) - 2.0).abs() < 1e-10);
    let fit = find_verdict(s, "lambda-fit");
    assert!(num(&fit["params"]["lambda"]).abs() < 1e-10);
    assert_eq!(report["summary"]["exit_code"], 0);
}

#[test]
fn torus_minkowski_example() {
    let out = hypercurv(&[
        "minkowski", "--shape", "torus", "--R", "2", "--r", "0.5", "--orders", "0,1", "--resolution", "128",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    validate(&report);
    let checks = report["surfaces"][0]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    for c in checks {
        assert_eq!(c["status"], "pass");
        assert!(num(&c["residual_rel"]) < 1e-8);
    }
}

#[test]
fn tight_tolerance_fails_with_exit_one() {
    let out = hypercurv(&[
        "minkowski", "--shape", "sphere", "--mesh-level", "2", "--tol", "integral=1e-6", "--format", "json",
    ]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    validate(&report);
    assert!(num(&report["summary"]["failed"]) >= 1.0);
}

#[test]
fn broken_meshes_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let open = write(dir.path(), "open.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
    let out = hypercurv(&["minkowski", "--mesh", &open]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("mesh not closed"), "{}", stderr(&out));

    let truncated = write(dir.path(), "short.off", "OFF\n3 1 0\n0 0 0\n");
    let out = hypercurv(&["minkowski", "--mesh", &truncated]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));

    let bad_index = write(dir.path(), "bad.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
    let out = hypercurv(&["minkowski", "--mesh", &bad_index]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());

    let missing = dir.path().join("nope.off");
    let out = hypercurv(&["minkowski", "--mesh", missing.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_and_config_errors_exit_two() {
    assert_eq!(code(&hypercurv(&["frobnicate"])), 2);
    assert_eq!(code(&hypercurv(&["minkowski"])), 2);
    assert_eq!(code(&hypercurv(&["minkowski", "--shape", "torus", "--R", "1", "--r", "2"])), 2);
    assert_eq!(code(&hypercurv(&["minkowski", "--shape", "sphere", "--orders", "2"])), 2);
    assert_eq!(code(&hypercurv(&["minkowski", "--shape", "sphere", "--resolution", "2"])), 2);
    assert_eq!(code(&hypercurv(&["minkowski", "--shape", "sphere", "--tol", "integral=-1"])), 2);
    assert_eq!(code(&hypercurv(&["convergence", "--shape", "sphere", "--levels", "16,32"])), 2);
}

#[test]
fn mesh_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let off = write(dir.path(), "ico.off", &icosphere(3, 1.0, [0.0; 3]).to_off());
    let obj = write(dir.path(), "torus.obj", &torus_mesh(32, 16, 2.0, 0.5).to_obj());

    let out = hypercurv(&["minkowski", "--mesh", &off]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    validate(&report);
    let mesh = &report["surfaces"][0]["stats"]["mesh"];
    assert_eq!(mesh["genus"], 0);
    assert_eq!(mesh["vertices"], 642);

    let out = hypercurv(&["minkowski", "--mesh", &obj, "--orders", "0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["surfaces"][0]["stats"]["mesh"]["genus"], 1);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["analyze", "--shape", "ellipsoid", "--resolution", "24", "--orientation", "both"];
    let reference = hypercurv(&args).stdout;
    for threads in ["1", "3", "8"] {
        let mut with = vec!["--threads", threads];
        with.extend_from_slice(&args);
        assert_eq!(hypercurv(&with).stdout, reference, "threads = {threads}");
    }
}

#[test]
fn output_file_and_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = hypercurv(&[
        "analyze", "--shape", "torus", "--resolution", "32", "--format", "csv", "-o", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, hypercurv_cli::output::CSV_COLUMNS);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert!(rows.iter().any(|r| &r[3] == "minkowski[r=1]"));
    assert!(rows.iter().any(|r| &r[2] == "theorem"));
    assert!(rows.iter().all(|r| r.len() == header.len()));
}

#[test]
fn torus_is_not_a_sphere() {
    let out = hypercurv(&["classify", "--shape", "torus", "--resolution", "48"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    validate(&report);
    let s = &report["surfaces"][0];
    assert_eq!(find_verdict(s, "sphere")["label"], "none");
    let t1 = s["theorem_residuals"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "theorem1[r=0]")
        .unwrap();
    assert!(num(&t1["residual_linf"]) > 0.05);
}

#[test]
fn shapes_catalog_lists_builtins() {
    let out = hypercurv(&["shapes"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    validate(&report);
    let names: Vec<&str> = report["catalog"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    for shape in ["sphere", "ellipsoid", "torus"] {
        assert!(names.contains(&shape), "{names:?}");
    }
}

#[test]
fn convergence_sweeps() {
    let out = hypercurv(&["convergence", "--shape", "sphere", "--mesh-level", "0", "--levels", "3,4,5", "--orders", "0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    validate(&report);
    let series = &report["convergence"][0];
    assert_eq!(series["monotone"], true);
    assert_eq!(series["order_status"], "fitted");
    assert!(num(&series["fitted_order"]) >= 1.0);

    let out = hypercurv(&["convergence", "--shape", "sphere", "--levels", "16,32,64"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    validate(&report);
    for s in report["convergence"].as_array().unwrap() {
        assert_eq!(s["order_status"], "saturated");
    }

    let out = hypercurv(&["convergence", "--shape", "ellipsoid", "--levels", "32,64,128", "--orders", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let series = &json(&out)["convergence"][0];
    assert!(num(&series["fitted_order"]) >= 2.0, "{series}");
}

#[test]
fn stiffness_export_is_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.mtx");
    let out = hypercurv(&[
        "lr-residual", "--shape", "sphere", "--mesh-level", "3", "--orders", "0", "--export-stiffness",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    validate(&json(&out));
    let exported: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!exported.is_empty());
    let text = std::fs::read_to_string(&exported[0]).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real"), "{}", &text[..60.min(text.len())]);
}

#[test]
fn timings_only_on_request() {
    let plain = json(&hypercurv(&["minkowski", "--shape", "sphere", "--resolution", "16"]));
    assert!(plain.get("timings").is_none());
    let timed = json(&hypercurv(&["minkowski", "--shape", "sphere", "--resolution", "16", "--timings"]));
    validate(&timed);
    assert!(timed["timings"].as_object().is_some_and(|t| !t.is_empty()));
}
