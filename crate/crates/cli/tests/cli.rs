use std::process::{Command, Output};

use serde_json::Value;

fn nhse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr is one JSON document")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn meta<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    let prefix = format!("# {key}: ");
    text.lines().find_map(|l| l.strip_prefix(prefix.as_str()))
}

#[test]
fn output_is_identical_for_any_thread_count() {
    for args in [
        vec!["nu-sweep", "--er", "0.72,0.64", "--v0", "log:1:1e12:49"],
        vec!["ipr-sweep", "--model", "ssh", "--t-prime", "0.5", "--v0", "log:0.1:1e7:33"],
        vec!["gap-scan", "--model", "ssh", "--t-prime", "lin:0.1:3:120"],
        vec!["validate"],
    ] {
        let runs: Vec<Output> = ["1", "3", "8"]
            .iter()
            .map(|t| {
                let mut a = args.clone();
                a.extend(["--threads", t]);
                nhse(&a)
            })
            .collect();
        for r in &runs {
            assert!(r.status.success(), "{args:?}: {}", String::from_utf8_lossy(&r.stderr));
            assert_eq!(r.stdout, runs[0].stdout, "{args:?}");
        }
    }
}

#[test]
fn metadata_header_records_version_hash_and_defaults() {
    let out = stdout(&nhse(&["nu-sweep", "--er", "0.72,0.64", "--v0", "log:1:1e4:5"]));
    assert_eq!(meta(&out, "tool"), Some(concat!("nhse ", env!("CARGO_PKG_VERSION"))));
    assert_eq!(meta(&out, "config_hash").map(str::len), Some(64));
    assert_eq!(meta(&out, "assumed"), Some("n=14,g=1"));
    let header = out.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "v0,re_nu,im_nu");

    let ssh = stdout(&nhse(&["nu-sweep", "--model", "ssh", "--er", "1.21,-0.25", "--v0", "log:1:1e4:5"]));
    assert_eq!(meta(&ssh, "assumed"), Some("n=14,g=1,t_prime=2.0"));
}

#[test]
fn floats_are_shortest_round_trip() {
    let out = stdout(&nhse(&["spectrum", "--v0", "7e5"]));
    for row in csv_rows(&out) {
        for cell in [&row[1], &row[2], &row[3], &row[4], &row[6], &row[8]] {
            let x: f64 = cell.parse().unwrap();
            assert_eq!(format!("{x:?}"), *cell);
        }
    }
}

#[test]
fn pbc_spectrum_is_all_bulk_with_im_theta_g() {
    let out = stdout(&nhse(&["spectrum", "--v0", "0"]));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 28);
    for r in rows.iter().filter(|r| r[7] == "exact") {
        assert_eq!(r[5], "bulk");
        let im_theta: f64 = r[4].parse().unwrap();
        assert!((im_theta - 1.0).abs() < 1e-10);
    }
    let d: f64 = meta(&out, "exact_vs_oracle_max_distance").unwrap().parse().unwrap();
    assert!(d < 1e-7);
}

#[test]
fn mixed_spectrum_below_the_transition() {
    let rows = csv_rows(&stdout(&nhse(&["spectrum", "--v0", "7e5"])));
    let bulk_exact: Vec<&Vec<String>> = rows.iter().filter(|r| r[7] == "exact" && r[5] == "bulk").collect();
    let real = bulk_exact.iter().filter(|r| r[2].parse::<f64>().unwrap() == 0.0).count();
    assert!(real > 0 && real < bulk_exact.len());
}

#[test]
fn critical_reports_closed_form_and_exact() {
    let o = nhse(&["critical", "--n", "4", "--g", "0.1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v["result"];
    let closed = r["closed_form"].as_f64().unwrap();
    let exact = r["exact"].as_f64().unwrap();
    assert!(exact < closed);
    let b = r["oracle_bracket"].as_array().unwrap();
    let (lo, hi) = (b[0].as_f64().unwrap(), b[1].as_f64().unwrap());
    assert!(lo <= exact * (1.0 + 1e-6) && exact <= hi * (1.0 + 1e-6));

    let big: Value = serde_json::from_slice(&nhse(&["critical"]).stdout).unwrap();
    assert!((big["result"]["closed_form"].as_f64().unwrap() / 1.2027e6 - 1.0).abs() < 1e-4);
}

#[test]
fn gap_scan_finds_the_weak_impurity_closings() {
    let rows = csv_rows(&stdout(&nhse(&["gap-scan", "--model", "ssh"])));
    let minima: Vec<f64> = rows
        .iter()
        .filter(|r| r[0] == "minimum" && r[3] == "true")
        .map(|r| r[1].parse().unwrap())
        .collect();
    let e = 1f64.exp();
    for t in [-e, -1.0 / e, 1.0 / e, e] {
        assert!(minima.iter().any(|m| (m - t).abs() < 0.02), "{t}: {minima:?}");
    }
}

#[test]
fn winding_far_outside_is_zero() {
    let v: Value = serde_json::from_slice(&nhse(&["winding", "--er", "10,0"]).stdout).unwrap();
    assert_eq!(v["result"]["winding"], 0);
    let v: Value = serde_json::from_slice(&nhse(&["winding", "--er=-0.81,-0.3"]).stdout).unwrap();
    assert_eq!(v["result"]["winding"], 1);
}

#[test]
fn flow_starts_at_zero_impurity() {
    let rows = csv_rows(&stdout(&nhse(&["flow", "--n", "6", "--v0", "log:0.1:100:4"])));
    assert_eq!(rows.len(), 5 * 6);
    assert!(rows[..6].iter().all(|r| r[0] == "0.0"));
}

#[test]
fn validate_passes_on_the_default_matrix() {
    let o = nhse(&["validate"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let s = &v["result"]["summary"];
    assert_eq!(s["all_pass"], true);
    assert!(s["max_distance"].as_f64().unwrap() < 1e-7);
    let hn = v["result"]["points"].as_array().unwrap().iter().filter(|p| p["model"] == "hn").count();
    assert_eq!(hn, 24);
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"model": "hn", "n": 10, "g": 0.5, "v0": "log:1:100:3"}"#).unwrap();
    let out = dir.path().join("out.csv");
    let o = nhse(&[
        "ipr-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let config: Value = serde_json::from_str(meta(&text, "config").unwrap()).unwrap();
    assert_eq!(config["n"], 8);
    assert_eq!(config["g"], 0.5);
    assert_eq!(meta(&text, "assumed"), Some(""));
    assert_eq!(csv_rows(&text).len(), 3);
}

#[test]
fn validation_errors_exit_with_one() {
    let cases: [&[&str]; 7] = [
        &["spectrum", "--n", "65"],
        &["spectrum", "--model", "ssh", "--n", "33"],
        &["ipr-sweep", "--v0", "log:10:1:5"],
        &["ipr-sweep", "--v0", "log:1:10:1"],
        &["critical", "--g", "0"],
        &["nu-sweep", "--v0", "log:1:10:3"],
        &["no-such-command"],
    ];
    for args in cases {
        let o = nhse(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let e = error_json(&o);
        assert_eq!(e["error"]["kind"], "validation", "{args:?}");
        assert_eq!(e["error"]["exit_code"], 1);
    }
}

#[test]
fn config_errors_point_at_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"n\": 14,\n  \"gg\": 1\n}\n").unwrap();
    let o = nhse(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let msg = error_json(&o)["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("gg") && msg.contains("line 3"), "{msg}");
}

#[test]
fn reference_on_the_pbc_spectrum_is_rejected() {
    let er = format!("{},0", 2.0 * 1f64.cosh());
    let o = nhse(&["winding", "--er", &er]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numerical_failures_exit_with_two() {
    // A grid point exactly at the real critical impurity makes E_r an
    // eigenvalue, so the resolvent solve is refused.
    let probe = stdout(&nhse(&["nu-sweep", "--er", "5", "--v0", "log:1:10:3"]));
    let vc = meta(&probe, "vc_abs").unwrap().to_string();
    let o = nhse(&["nu-sweep", "--er", "5", "--v0", &format!("lin:{vc}:10:2")]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"]["kind"], "numerical");
}
