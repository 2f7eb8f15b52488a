use std::process::{Command, Output};

use serde_json::Value;

fn waves(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waves")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv_text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(csv_text.as_bytes()).records().map(|r| r.unwrap()).collect()
}

#[test]
fn compute_reports_json() {
    let o = waves(&["compute", "a=0", "d=2"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let report = &v["outputs"]["report"];
    assert!((report["tau_star"].as_f64().unwrap() - 3.9999991).abs() < 1e-6);
    for key in ["mu2", "lambda2", "b"] {
        assert!(report[key].as_f64().is_some(), "{key}");
    }
    assert_eq!(v["inputs"]["command"], "compute");
    assert_eq!(v["provenance"]["version"], env!("CARGO_PKG_VERSION"));
    // key order is fixed
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["inputs", "outputs", "provenance"]);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [&["compute", "a=-2", "d=1.2", "t=0.01", "--grid=6x40"][..], &["figure", "4", "--points", "30"][..]] {
        let (x, y) = (waves(args), waves(args));
        assert!(x.status.success());
        assert_eq!(x.stdout, y.stdout);
    }
}

#[test]
fn json_round_trip_preserves_values() {
    let o = waves(&["compute", "a=-1", "d=1.5", "--format", "csv"]);
    let table = rows(&stdout(&o));
    let j: Value = serde_json::from_str(&stdout(&waves(&["compute", "a=-1", "d=1.5"]))).unwrap();
    for r in &table {
        let path: Vec<&str> = r[0].split('.').collect();
        let mut node = &j["outputs"];
        for p in &path {
            node = match p.parse::<usize>() {
                Ok(i) if node.is_array() => &node[i],
                _ => &node[*p],
            };
        }
        if let (Some(a), Ok(b)) = (node.as_f64(), r[1].parse::<f64>()) {
            assert_eq!(a, b, "{}", &r[0]);
        }
    }
}

#[test]
fn usage_errors_exit_two() {
    let o = waves(&["compute", "a=-3", "d=0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let diag: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(diag["error"], "usage");
    assert!(diag["message"].as_str().unwrap().contains("critical depth"));
    assert_eq!(waves(&["figure", "9"]).status.code(), Some(2));
    assert_eq!(waves(&["compute", "a=0"]).status.code(), Some(2));
    assert_eq!(waves(&["curve", "nonsense"]).status.code(), Some(2));
    assert_eq!(waves(&["curve", "signed_log_mu2"]).status.code(), Some(2));
}

#[test]
fn solver_failures_exit_three() {
    // amplitude large enough for the surface to reach the bottom
    let o = waves(&["compute", "a=0", "d=1.5", "t=5"]);
    assert_eq!(o.status.code(), Some(3));
    let diag: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(diag["error"], "solver");
}

#[test]
fn unwritable_path_is_reported() {
    let o = waves(&["figure", "2", "--points", "5", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"io\""));
}

#[test]
fn figure1_d0_meets_stagnation_depth_near_a0() {
    let text = stdout(&waves(&["figure", "1", "--points", "121"]));
    let table = rows(&text);
    let col = |id: &str| -> Vec<(f64, f64)> {
        table.iter().filter(|r| &r[0] == id).map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap())).collect()
    };
    let (d0, ds) = (col("d0"), col("stagnation_depth"));
    let mut crossing = None;
    for i in 1..d0.len() {
        let (g0, g1) = (d0[i - 1].1 - ds[i - 1].1, d0[i].1 - ds[i].1);
        if d0[i].0 < 0.0 && (g0 > 0.0) != (g1 > 0.0) {
            crossing = Some(d0[i - 1].0 - g0 * (d0[i].0 - d0[i - 1].0) / (g1 - g0));
        }
    }
    let a = crossing.expect("d0 and d_s cross");
    assert!((a + 1.018).abs() < 0.02, "{a}");
}

#[test]
fn figure3_crosses_zero_at_d0() {
    let text = stdout(&waves(&["figure", "3", "--points", "80"]));
    let table = rows(&text);
    let d0_zero: Value =
        serde_json::from_str(&stdout(&waves(&["curve", "d0", "a_min=-0.1", "a_max=0", "points=2", "--format", "json"]))).unwrap();
    let expected = d0_zero["table"]["rows"][1][1].as_f64().unwrap();
    let curve: Vec<(f64, f64)> = table
        .iter()
        .filter(|r| r[1].parse::<f64>().unwrap() == 0.0)
        .map(|r| (r[2].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    let i = curve.windows(2).position(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0)).unwrap();
    let (x0, y0) = curve[i];
    let (x1, y1) = curve[i + 1];
    let root = x0 - y0 * (x1 - x0) / (y1 - y0);
    assert!((root - expected).abs() < 1e-6, "{root} vs {expected}");
}

#[test]
fn figure5_svg_has_limit_level() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig5.svg");
    let o = waves(&["figure", "5", "--points", "40", "--format", "svg", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("stroke-dasharray") && svg.contains("ystar_limit"));
    assert_eq!(svg.matches("<polyline").count(), 1);

    let table = rows(&stdout(&waves(&["figure", "5", "--points", "40"])));
    let ys: Vec<f64> = table.iter().map(|r| r[3].parse().unwrap()).collect();
    // Y* decreases monotonically from a = -1000 toward a0
    assert!(ys.windows(2).all(|w| w[0] > w[1]), "{ys:?}");
}

#[test]
fn curve_header_and_rows() {
    let text = stdout(&waves(&["curve", "critical_depth", "a_min=-1", "a_max=1", "points=3"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,d,value,converged"));
    let second: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    assert_eq!(second[1].parse::<f64>().unwrap(), 1.0);
    assert_eq!(second[1].split('e').next().unwrap().len(), 18); // 17 digits and a point
}

#[test]
fn verify_single_criterion() {
    let o = waves(&["verify", "--criterion", "1"]);
    assert!(o.status.success());
    let t = rows(&stdout(&o));
    assert_eq!(t.len(), 1);
    assert_eq!(&t[0][2], "true");
    assert!(String::from_utf8_lossy(&o.stderr).contains("[PASS] criterion 1"));
}

#[test]
fn verify_quick_passes() {
    let o = waves(&["verify", "--quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(rows(&stdout(&o)).len(), 9);
}

#[test]
fn thread_cap_is_honoured() {
    let o = Command::new(env!("CARGO_BIN_EXE_waves"))
        .args(["curve", "d0", "points=8"])
        .env("WAVES_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_waves")).args(["curve", "d0"]).env("WAVES_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
