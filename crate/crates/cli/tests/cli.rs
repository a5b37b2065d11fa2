use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn pathpair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathpair"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let out = pathpair(&all);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(v["schemaVersion"], 1);
    v
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn bundled(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/schemes")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn simulate_scheme_a_json() {
    let v = json(&["simulate", "--scheme", "a"]);
    assert_eq!(v["pEF"], 0.25);
    assert_eq!(v["pFE"], 0.25);
    assert_eq!(v["pEE"], 0.0);
    assert_eq!(v["gammaTotal"], 0.5);
    assert_eq!(v["bellOverlaps"]["psiPlusOverlap"], 1.0);
    assert_eq!(v["bellOverlaps"]["phiMinusOverlap"], 0.0);
    let ef = v["state"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["ket"] == "|E,F>")
        .unwrap();
    assert_eq!(ef["re"], 0.0);
    assert_eq!(ef["im"], -0.5);
}

#[test]
fn simulate_scheme_b_table() {
    let out = pathpair(&["simulate", "--scheme", "b"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("|E,E> : 0.5+0i"), "{text}");
    assert!(text.contains("|F,F> : -0.5+0i"), "{text}");
    let line = text
        .lines()
        .find(|l| l.starts_with("phiMinusOverlap"))
        .unwrap();
    assert!(line.ends_with(" 1"), "{line}");
    let v = json(&["simulate", "--scheme", "b"]);
    assert_eq!(v["pEE"], 0.25);
    assert_eq!(v["pFF"], 0.25);
    assert_eq!(v["bellOverlaps"]["phiMinusOverlap"], 1.0);
}

#[test]
fn simulate_bundled_file_matches_builtin() {
    let from_file = json(&["simulate", "--scheme", &bundled("scheme_a.scm.txt")]);
    let builtin = json(&["simulate", "--scheme", "a"]);
    assert_eq!(from_file, builtin);
}

#[test]
fn simulate_csv() {
    let out = pathpair(&["--format", "csv", "simulate", "--scheme", "a"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert!(rows.iter().any(|r| &r[1] == "pEF" && &r[2] == "0.25"));
    assert!(rows
        .iter()
        .any(|r| &r[1] == "psiPlusOverlap" && &r[2] == "1"));
}

#[test]
fn missing_scheme_file() {
    let out = pathpair(&["simulate", "--scheme", "missing.scm.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("file not found"));
}

#[test]
fn invalid_scheme_file_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dup.scm.txt");
    std::fs::write(
        &path,
        "scheme s {\n  wing minus { }\n  wing plus = minus\n  annihilate { (a-, a+) -> P; (b-, b+) -> P }\n}\n",
    )
    .unwrap();
    let out = pathpair(&["simulate", "--scheme", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains(":4:43: error: duplicate gamma label 'P'"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn sample_zero_cells_and_determinism() {
    let args = ["sample", "--scheme", "b", "-n", "100000", "--seed", "7"];
    let v = json(&args);
    assert_eq!(v["cells"]["EF"]["count"], 0);
    assert_eq!(v["cells"]["FE"]["count"], 0);
    assert_eq!(v["n"], 100000);
    assert_eq!(v["seed"], 7);
    let total: u64 = v["cells"]
        .as_object()
        .unwrap()
        .values()
        .map(|c| c["count"].as_u64().unwrap())
        .sum();
    assert_eq!(total, 100000);
    let ee = v["cells"]["EE"]["estimate"].as_f64().unwrap();
    let se = v["cells"]["EE"]["standardError"].as_f64().unwrap();
    assert!((ee - 0.25).abs() < 5.0 * se);

    for format in ["table", "json", "csv"] {
        let mut a = vec!["--format", format];
        a.extend_from_slice(&args);
        assert_eq!(pathpair(&a).stdout, pathpair(&a).stdout);
    }
}

#[test]
fn sample_empty() {
    let v = json(&["sample", "--scheme", "a", "-n", "0", "--seed", "1"]);
    assert_eq!(v["n"], 0);
    for (_, cell) in v["cells"].as_object().unwrap() {
        assert_eq!(cell["count"], 0);
        assert!(cell["estimate"].is_null());
    }
}

#[test]
fn sample_default_seed_is_fixed() {
    let v = json(&["sample", "-n", "10"]);
    assert_eq!(v["seed"], 42);
    assert_eq!(json(&["sample", "-n", "10"]), v);
}

#[test]
fn sample_rejects_negative_n() {
    let out = pathpair(&["sample", "-n", "-5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pathpair(&["sample", "-n", "many"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lhv_from_qm() {
    let v = json(&["lhv", "--from-qm"]);
    assert_eq!(v["verdict"], "Infeasible");
    assert_eq!(v["contradictionFraction"], 0.5);
    assert_eq!(v["certificate"]["verified"], true);
    assert!(v["weights"].is_null());
    let v = json(&["lhv", "--from-qm", "--product-form"]);
    assert_eq!(v["productForm"]["verdict"], "Infeasible");
}

#[test]
fn lhv_equal_behavior_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    std::fs::write(
        &path,
        r#"{"EE":0.25,"EF":0,"FE":0,"FF":0.25,"E_":0,"F_":0,"_E":0,"_F":0,"__":0.5}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let v = json(&["lhv", "--a", p, "--b", p]);
    assert_eq!(v["verdict"], "Feasible");
    assert_eq!(v["weights"]["EE"], 0.25);
    assert_eq!(v["weights"]["__"], 0.5);
    assert_eq!(v["contradictionFraction"], 0.0);
}

#[test]
fn lhv_malformed_behavior() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"EE":0.25}"#).unwrap();
    let p = bad.to_str().unwrap();
    let out = pathpair(&["lhv", "--a", p, "--b", p]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("malformed behavior"),
        "{}",
        stderr(&out)
    );
    let out = pathpair(&["lhv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pathpair(&["lhv", "--from-qm", "--a", p, "--b", p]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_ratio_row_matches_simulate() {
    let sim = json(&["simulate", "--scheme", "a"]);
    let v = json(&[
        "sweep",
        "--scheme",
        "a",
        "--param",
        "bs1",
        "--range",
        "1/sqrt2:1/sqrt2:0.1",
    ]);
    let row = &v["rows"][0];
    for key in ["pEE", "pEF", "pFE", "pFF", "gammaTotal"] {
        assert_eq!(row[key], sim[key], "{key}");
    }
    let v = json(&[
        "sweep", "--scheme", "a", "--param", "phase-ab", "--range", "0:0:1",
    ]);
    for key in ["pEE", "pEF", "pFE", "pFF", "gammaTotal"] {
        assert_eq!(v["rows"][0][key], sim[key], "{key}");
    }
}

#[test]
fn sweep_rows_in_grid_order() {
    let v = json(&[
        "sweep",
        "--scheme",
        "a",
        "--param",
        "minus.phase-cd",
        "--range",
        "0:3:0.25",
    ]);
    let values: Vec<f64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["value"].as_f64().unwrap())
        .collect();
    assert_eq!(values.len(), 13);
    assert!(values.windows(2).all(|w| w[0] < w[1]));
    for r in v["rows"].as_array().unwrap() {
        let total: f64 = ["pEE", "pEF", "pFE", "pFF", "gammaTotal"]
            .iter()
            .map(|k| r[k].as_f64().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
}

#[test]
fn sweep_errors() {
    let out = pathpair(&["sweep", "--param", "bs9", "--range", "0:1:0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown parameter"));
    let out = pathpair(&["sweep", "--param", "bs1", "--range", "0:2:0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pathpair(&["sweep", "--param", "bs1", "--range", "0:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_check_exit_codes() {
    let out = pathpair(&["parse-check", &bundled("scheme_a.scm.txt")]);
    assert_eq!(out.status.code(), Some(0));
    let out = pathpair(&["parse-check", &bundled("scheme_b.scm.txt")]);
    assert_eq!(out.status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let dup = dir.path().join("dup.scm.txt");
    std::fs::write(
        &dup,
        "scheme s {\n  wing minus { }\n  wing plus = minus\n  annihilate { (a-, a+) -> P; (b-, b+) -> P }\n}\n",
    )
    .unwrap();
    let out = pathpair(&["parse-check", dup.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("4:43: error: duplicate gamma label 'P'"),
        "{}",
        stderr(&out)
    );

    let v: Value = serde_json::from_slice(
        &pathpair(&["--format", "json", "parse-check", dup.to_str().unwrap()]).stdout,
    )
    .unwrap();
    assert_eq!(v["valid"], false);
    assert_eq!(v["diagnostics"][0]["line"], 4);
    assert_eq!(v["diagnostics"][0]["column"], 43);

    let bin = dir.path().join("bin.scm.txt");
    std::fs::write(&bin, [b's', b'c', 0xff, 0xfe, b'\n']).unwrap();
    let out = pathpair(&["parse-check", bin.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("invalid encoding"));

    let out = pathpair(&["parse-check", dir.path().join("nope").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    // a directory cannot be read as a file
    let out = pathpair(&["parse-check", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_global_flags() {
    assert_eq!(
        pathpair(&["--format", "xml", "simulate"]).status.code(),
        Some(2)
    );
    assert_eq!(
        pathpair(&["--tolerance", "-1", "simulate"]).status.code(),
        Some(2)
    );
    assert_eq!(pathpair(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn tolerance_flag_is_accepted_after_subcommand() {
    let v = json(&["simulate", "--scheme", "a", "--tolerance", "1e-9"]);
    assert_eq!(v["tolerance"], 1e-9);
    assert_eq!(v["pEF"], 0.25);
}

#[test]
fn sweep_bs3_matches_dense_oracle() {
    use pathpair::circuit::{build_scheme_b, BeamSplitter};
    use pathpair::evolution::{dense_oracle, outcome_distribution};

    let v = json(&[
        "sweep", "--scheme", "b", "--param", "bs3", "--range", "0:1:0.25",
    ]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for (k, row) in rows.iter().enumerate() {
        let r = k as f64 * 0.25;
        let mut scheme = build_scheme_b();
        scheme.minus.splitters[2] = BeamSplitter::new(r).unwrap();
        scheme.plus.splitters[2] = BeamSplitter::new(r).unwrap();
        let d = outcome_distribution(&dense_oracle(&scheme).unwrap()).unwrap();
        assert_eq!(row["value"].as_f64().unwrap(), r);
        for (key, p) in [
            ("pEE", d.p_ee),
            ("pEF", d.p_ef),
            ("pFE", d.p_fe),
            ("pFF", d.p_ff),
            ("gammaTotal", d.gamma_total()),
        ] {
            assert!(
                (row[key].as_f64().unwrap() - p).abs() < 1e-10,
                "r={r} {key}"
            );
        }
    }
}

#[test]
fn sweep_single_wing_ratio_matches_dense_oracle() {
    use pathpair::circuit::{build_scheme_a, BeamSplitter};
    use pathpair::evolution::{dense_oracle, outcome_distribution};

    let v = json(&[
        "sweep",
        "--scheme",
        "a",
        "--param",
        "plus.bs2",
        "--range",
        "0.1:0.9:0.2",
    ]);
    for row in v["rows"].as_array().unwrap() {
        let r = row["value"].as_f64().unwrap();
        let mut scheme = build_scheme_a();
        scheme.plus.splitters[1] = BeamSplitter::new(r).unwrap();
        let d = outcome_distribution(&dense_oracle(&scheme).unwrap()).unwrap();
        assert!(
            (row["pEF"].as_f64().unwrap() - d.p_ef).abs() < 1e-10,
            "r={r}"
        );
        assert!(
            (row["pEE"].as_f64().unwrap() - d.p_ee).abs() < 1e-10,
            "r={r}"
        );
    }
}
