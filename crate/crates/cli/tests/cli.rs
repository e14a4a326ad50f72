use std::process::{Command, Output};

use serde_json::Value;

fn mu2amp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mu2amp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn mu2amp_threads(threads: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mu2amp"))
        .env("MU2AMP_THREADS", threads)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header and numeric rows of a CSV report, skipping `#` lines.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (header, rows) = parse_csv(text);
    let idx = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[idx].parse().unwrap()).collect()
}

#[test]
fn design_reports_stage_gains() {
    let text = stdout(&mu2amp(&["design", "--mu2", "0.5", "--gain", "9"]));
    assert!(text.starts_with("# mu2amp design --mu2 0.5 --gain 9 "));
    assert!((column(&text, "g1")[0] - 1.406).abs() < 5e-4);
    assert!((column(&text, "alpha_tilde_n2")[0] - 1.006).abs() < 5e-4);
    let ideal = stdout(&mu2amp(&["design", "--mu2", "1", "--gain", "9"]));
    let (_, rows) = parse_csv(&ideal);
    assert_eq!(&rows[0][5..7], ["-", "-"]);
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let cases: [&[&str]; 3] = [
        &["qgrid", "--mu2", "0", "--gain", "9", "--alpha", "0.11", "--grid", "-2,3,-2,2,31,25"],
        &["sweep", "--metric", "pfp-exact", "--mu2", "0.5", "--gain", "9", "--steps", "301"],
        &["snr", "--mode", "quadrature", "--mu2", "0.5", "--gain", "9", "--steps", "51"],
    ];
    for args in cases {
        let one = mu2amp_threads("1", args);
        let four = mu2amp_threads("4", args);
        let again = mu2amp_threads("4", args);
        assert_eq!(stdout(&one), stdout(&four), "{args:?}");
        assert_eq!(four.stdout, again.stdout, "{args:?}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(mu2amp(&["--help"]).status.code(), Some(0));
    assert_eq!(mu2amp(&["sweep", "--help"]).status.code(), Some(0));
    assert_eq!(mu2amp(&["design", "--mu2", "0.5"]).status.code(), Some(1));
    assert_eq!(mu2amp(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        mu2amp(&["sweep", "--metric", "nope", "--mu2", "0", "--gain", "9"]).status.code(),
        Some(1)
    );
    assert_eq!(mu2amp(&["design", "--mu2", "0.5", "--gain", "0.5"]).status.code(), Some(1));
    assert_eq!(mu2amp(&["table1", "--precision", "0"]).status.code(), Some(1));

    let quick = mu2amp(&["verify"]);
    assert_eq!(quick.status.code(), Some(0), "{}", String::from_utf8_lossy(&quick.stdout));
    assert!(!String::from_utf8_lossy(&quick.stdout).contains("FAIL"));

    let forced = mu2amp(&["verify", "--cutoff", "5"]);
    assert_eq!(forced.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&forced.stderr);
    assert!(msg.contains("cutoff insufficient") && msg.contains("increase the cutoff"), "{msg}");

    let faulty = mu2amp(&["verify", "--inject-fault", "1e-4"]);
    assert_eq!(faulty.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&faulty.stdout).contains("FAIL"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# perfect amplifier\nmu2 = 0.5\ngain = 9\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = stdout(&mu2amp(&["design", "--config", cfg]));
    let from_flags = stdout(&mu2amp(&["design", "--mu2", "0.5", "--gain", "9"]));
    assert_eq!(from_file, from_flags);

    let overridden = stdout(&mu2amp(&["design", "--config", cfg, "--gain", "3"]));
    assert!(overridden.starts_with("# mu2amp design --mu2 0.5 --gain 3 "));

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "mu2 = 0.5\ngain = 9\nsteps = 4\n").unwrap();
    let out = mu2amp(&["design", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown config key 'steps'"));
}

#[test]
fn json_mirrors_csv() {
    let args = ["table1", "--gain", "9", "--ncut", "2"];
    let csv_text = stdout(&mu2amp(&args));
    let json_text = stdout(&mu2amp(&[&args[..], &["--format", "json"]].concat()));
    let doc: Value = serde_json::from_str(&json_text).unwrap();
    let (header, rows) = parse_csv(&csv_text);
    assert_eq!(doc["columns"], serde_json::json!(header));
    for (r, row) in rows.iter().enumerate() {
        assert_eq!(doc["rows"][r][0], Value::String(row[0].clone()));
        for (c, cell) in row.iter().enumerate().skip(1) {
            let from_csv: f64 = cell.parse().unwrap();
            assert_eq!(doc["rows"][r][c].as_f64().unwrap(), from_csv, "row {r} column {c}");
        }
    }
    assert_eq!(doc["markers"]["gain"], serde_json::json!(9.0));
    let comment = doc["comment"].as_str().unwrap();
    assert_eq!(comment, "mu2amp table1 --gain 9 --ncut 2 --format json --precision 9");
}

#[test]
fn output_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = mu2amp(&["table1", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&mu2amp(&["table1"])));
}

#[test]
fn sweep_examples() {
    let ideal = stdout(&mu2amp(&["sweep", "--metric", "pfp-exact", "--mu2", "1", "--gain", "9"]));
    assert!(column(&ideal, "pfp_exact").iter().all(|&v| (v - 1.0).abs() < 1e-12));

    let args = ["sweep", "--metric", "pfp-exact", "--mu2", "0", "--gain", "9", "--alpha-max", "0.3", "--steps", "3001"];
    let text = stdout(&mu2amp(&args));
    let alpha = column(&text, "alpha");
    let pfp = column(&text, "pfp_exact");
    let (i, peak) = pfp.iter().copied().enumerate().fold((0, 0.0), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    assert!((peak - 1.454).abs() < 1e-3, "peak {peak}");
    assert!((alpha[i] - 0.110).abs() < 1e-3, "at {}", alpha[i]);
    assert!((column(&text, "alpha_bump")[0] - 0.110).abs() < 1e-3);

    for mu2 in ["0", "0.3", "0.5", "0.9"] {
        let text = stdout(&mu2amp(&["sweep", "--metric", "pfp-exact", "--mu2", mu2, "--gain", "9", "--ncut", "2"]));
        assert!(column(&text, "pfp_exact").iter().all(|&v| v <= 1.0 + 1e-9), "μ² = {mu2}");
    }
}

#[test]
fn table1_examples() {
    let text = stdout(&mu2amp(&["table1", "--gain", "9", "--ncut", "2"]));
    let (_, rows) = parse_csv(&text);
    let row = |q: &str| rows.iter().find(|r| r[0] == q).unwrap().clone();
    assert_eq!(row("nf_antinormal")[4], "1");
    let pfp: f64 = row("pfp")[1].parse().unwrap();
    assert!((pfp - 1.0 / 81.0).abs() < 1e-9);
}

#[test]
fn qgrid_examples() {
    let text = stdout(&mu2amp(&["qgrid", "--mu2", "0", "--gain", "9", "--alpha", "0.11", "--grid", "-5,6,-5,5,221,201"]));
    let marker = |name: &str| -> f64 {
        let prefix = format!("# marker {name}=");
        text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap().parse().unwrap()
    };
    assert!((marker("integral") - 1.0).abs() < 1e-6);
    assert!((marker("target_re") - 0.99).abs() < 1e-12);

    // Ideal amplifier: Gaussian of antinormal variance G² centred on Gα.
    let text = stdout(&mu2amp(&["qgrid", "--mu2", "1", "--gain", "3", "--alpha", "0.5", "--alpha-im", "-0.2", "--grid", "-6,6,-6,6,25,25"]));
    let (re, im, q) = (column(&text, "re"), column(&text, "im"), column(&text, "q"));
    for k in 0..q.len() {
        let d2 = (re[k] - 1.5).powi(2) + (im[k] + 0.6).powi(2);
        let want = (-d2 / 9.0).exp() / (9.0 * std::f64::consts::PI);
        assert!((q[k] - want).abs() <= 1e-10, "β = {} {}: {} vs {want}", re[k], im[k], q[k]);
    }
}

#[test]
fn snr_vanishes_without_signal() {
    let text = stdout(&mu2amp(&["snr", "--mode", "quadrature", "--mu2", "0.5", "--gain", "9", "--steps", "5"]));
    for name in ["snr_x1", "snr_x2", "sqrtp_snr_x1", "sqrtp_snr_x2", "snr_in"] {
        assert_eq!(column(&text, name)[0], 0.0, "{name}");
    }
}

#[test]
fn contour_marks_the_boundary() {
    let text = stdout(&mu2amp(&["contour", "--mu2-steps", "11", "--gain2-steps", "10"]));
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, ["mu2", "gain2", "pfp", "mu2_gain2", "regime"]);
    assert_eq!(rows.len(), 110);
    for r in &rows {
        let x: f64 = r[3].parse().unwrap();
        let expected = if x < 1.0 { "immaculate-dominant" } else if x > 1.0 { "ideal-dominant" } else { "boundary" };
        assert_eq!(r[4], expected);
    }
    assert_eq!(mu2amp(&["contour", "--log"]).status.code(), Some(1));
}
