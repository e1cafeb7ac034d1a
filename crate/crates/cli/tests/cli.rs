use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn hball(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hball"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hball-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn classify_blaschke_is_inner() {
    let out = hball(&["--n-grid", "1024", "classify", "blaschke", "--zeros", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["results"]["classification"], "INNER");
    assert!(v["results"]["inner_defect"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(
        v["config_echo"]["command"]["classify"]["function"]["kind"],
        "blaschke"
    );
}

#[test]
fn classify_two_level_reports_ladder() {
    let out = hball(&[
        "--n-grid",
        "2048",
        "classify",
        "two-level",
        "--n",
        "2",
        "--eta",
        "0.5",
        "--gamma",
        "0.25",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let r = &v["results"];
    assert_eq!(r["extremality"]["integrals"].as_array().unwrap().len(), 10);
    assert!(r["exposed_mass"].as_f64().unwrap() > 0.5);
    let sub = r["sublevel"].as_array().unwrap();
    assert_eq!(sub.len(), 9);
    assert!(sub[4]["measure"].as_f64().unwrap() >= 0.25);
}

#[test]
fn classify_csv_is_long_format() {
    let out = hball(&[
        "--n-grid",
        "256",
        "--format",
        "csv",
        "classify",
        "poly-fraction",
        "--num",
        "0.5,0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("quantity,parameter,value\n"));
    assert!(text.lines().any(|l| l.starts_with("sublevel_measure,0.5,")));
}

#[test]
fn strong_witness_meets_target() {
    let out = hball(&[
        "--n-grid",
        "4096",
        "witness",
        "--mode",
        "strong",
        "--eta",
        "0.5",
        "--delta",
        "0.01",
        "two-level",
        "--n",
        "1",
        "--eta",
        "0.5",
        "--gamma",
        "0.5",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    let w = &v["results"]["witness"];
    assert!(w["norm_g"].as_f64().unwrap() >= w["target_bound"].as_f64().unwrap());
    assert!(w["norm_plus"].as_f64().unwrap() <= 1.01);
    assert!(w["norm_minus"].as_f64().unwrap() <= 1.01);
    assert_eq!(v["results"]["valid"], true);
}

#[test]
fn extreme_witness_on_polynomial() {
    let out = hball(&[
        "--n-grid",
        "131072",
        "witness",
        "--mode",
        "extreme",
        "--phi",
        "fourier:1",
        "poly-fraction",
        "--num",
        "0.5,0.5",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let w = &json(&out)["results"]["witness"];
    assert!(w["norm_plus"].as_f64().unwrap() <= 1.0 + 1e-6);
    assert!(w["norm_minus"].as_f64().unwrap() <= 1.0 + 1e-6);
    assert!(w["membership"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn degenerate_inputs_have_distinct_codes() {
    let inner = hball(&[
        "--n-grid",
        "512",
        "witness",
        "--eta",
        "0.5",
        "--delta",
        "0.01",
        "blaschke",
        "--zeros",
        "0.5,-0.2+0.3i",
    ]);
    assert_eq!(inner.status.code(), Some(3));

    let empty = hball(&[
        "--n-grid",
        "512",
        "witness",
        "--eta",
        "0.5",
        "--delta",
        "0.01",
        "poly-fraction",
        "--num",
        "0.8,0.2",
    ]);
    assert_eq!(empty.status.code(), Some(4));

    let extreme = hball(&[
        "--n-grid",
        "1024",
        "witness",
        "--mode",
        "extreme",
        "two-level",
        "--n",
        "1",
        "--eta",
        "0.5",
        "--gamma",
        "0.5",
        "--margin",
        "32",
    ]);
    assert_eq!(extreme.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &["classify", "blaschke", "--zeros", "1.5"],
        &["--n-grid", "1000", "classify", "blaschke", "--zeros", "0.5"],
        &[
            "--n-grid",
            "256",
            "classify",
            "poly-fraction",
            "--num",
            "1",
            "--den",
            "0,1",
        ],
        &[
            "--n-grid",
            "256",
            "witness",
            "poly-fraction",
            "--num",
            "0.5,0.5",
        ],
        &[
            "--n-grid",
            "256",
            "witness",
            "--phi",
            "nope",
            "--eta",
            "0.5",
            "--delta",
            "0.1",
            "poly-fraction",
            "--num",
            "0.5,0.5",
        ],
        &["--tol-sup", "-1", "classify", "blaschke", "--zeros", "0.5"],
        &["frobnicate"],
    ];
    for args in cases {
        assert_eq!(hball(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn tn_corpus_has_no_violations() {
    let out = hball(&["--n-grid", "1024", "tn", "--count", "150"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["results"];
    assert_eq!(r["violations"], 0);
    assert_eq!(r["count"], 150);

    let single = hball(&[
        "--n-grid",
        "1024",
        "tn",
        "--count",
        "40",
        "--max-terms",
        "1",
    ]);
    let r = &json(&single)["results"];
    assert!((r["max_ratio"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let loose = hball(&[
        "--n-grid",
        "1024",
        "tn",
        "--count",
        "60",
        "--max-terms",
        "8",
        "--min-measure",
        "0.01",
    ]);
    assert_eq!(loose.status.code(), Some(0));
    assert_eq!(json(&loose)["results"]["violations"], 0);
}

fn write_config(name: &str, seed: u64) -> PathBuf {
    let path = scratch(name);
    let cfg = serde_json::json!({
        "N_values": [1],
        "eta_values": [0.5],
        "gamma_values": [0.5, 0.25],
        "delta_ladder": [0.1, 0.01],
        "n_grid": 4096,
        "seed": seed,
        "trials_per_cell": 3
    });
    std::fs::write(&path, cfg.to_string()).unwrap();
    path
}

#[test]
fn sweep_writes_json_and_csv() {
    let cfg = write_config("small.json", 1);
    let base = scratch("small-out");
    let out = hball(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(base.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")));
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(v["results"]["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["config_echo"]["resolved"]["N_values"][0], 1);
}

#[test]
fn sweep_seed_only_moves_probe_statistics() {
    let cfg = write_config("seeded.json", 0);
    let run = |seed: &str| {
        let out = hball(&[
            "--seed",
            seed,
            "--format",
            "csv",
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    let sandwich = |csv: &str| {
        csv.lines()
            .map(|l| l.split(',').nth(7).unwrap().to_string())
            .collect::<Vec<_>>()
    };
    let (a, b, a2) = (run("1"), run("2"), run("1"));
    assert_eq!(sandwich(&a), sandwich(&b));
    assert_eq!(a, a2);
}

#[test]
fn malformed_sweep_config_exits_two() {
    let path = scratch("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(
        hball(&["sweep", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let path = scratch("descending.json");
    std::fs::write(
        &path,
        r#"{"N_values":[1],"eta_values":[0.5],"gamma_values":[0.5],"delta_ladder":[0.01,0.1],"n_grid":256,"seed":0,"trials_per_cell":0}"#,
    )
    .unwrap();
    assert_eq!(
        hball(&["sweep", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn outer_from_file() {
    let n = 512;
    let modulus: Vec<f64> = (0..n)
        .map(|j| (0.3 * (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos()).exp())
        .collect();
    let path = scratch("modulus.json");
    std::fs::write(&path, serde_json::to_string(&modulus).unwrap()).unwrap();
    let out = hball(&["outer", "--file", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = &json(&out)["results"];
    assert!(r["modulus_error"].as_f64().unwrap() < 1e-12);
    assert!(r["analyticity"].as_f64().unwrap() < 1e-12);
    // The mean of 0.3·cos is zero, so G(0) = 1.
    assert!((r["value_at_origin"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r["boundary"].as_array().unwrap().len(), n);

    let mismatch = hball(&[
        "--n-grid",
        "1024",
        "outer",
        "--file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(mismatch.status.code(), Some(2));

    let classified = hball(&[
        "--n-grid",
        "512",
        "classify",
        "outer-from-modulus",
        "--file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(classified.status.code(), Some(0));
}

#[test]
fn spectrum_literal_round_trip() {
    let path = scratch("spectrum.json");
    std::fs::write(
        &path,
        r#"[{"k":0,"re":0.25,"im":0.0},{"k":3,"re":0.0,"im":0.5}]"#,
    )
    .unwrap();
    let out = hball(&[
        "--n-grid",
        "256",
        "classify",
        "spectrum-literal",
        "--file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["results"];
    assert!((r["sup_norm"].as_f64().unwrap() - 0.75).abs() < 1e-9);
    assert!(r["analyticity"].as_f64().unwrap() < 1e-15);
}
