use std::path::Path;
use std::process::{Command, Output};

use cca_cli::{Manifest, RunConfig};
use cca_core::spectrum::{bound_state, Branch};
use cca_core::ModelParams;

fn cca(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cca"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Manifest {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Header and data rows of a table, comment lines skipped.
fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).expect(name);
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn figure4_table_and_saturation() {
    let dir = tempfile::tempdir().unwrap();
    let out = cca(dir.path(), &["figure", "4"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = table(&dir.path().join("figure4.csv"));
    assert_eq!(
        header,
        ["eta", "eps_floc", "eps_atr", "omega_plus_minus_2J"]
    );
    assert_eq!(rows.len(), 401);
    let floc = column(&header, &rows, "eps_floc");
    let atr = column(&header, &rows, "eps_atr");
    let gap = column(&header, &rows, "omega_plus_minus_2J");
    assert!(floc.iter().zip(&atr).all(|(f, a)| f >= a));
    assert!(gap.windows(2).all(|w| w[1] > w[0]));
    // Both averages approach 1/2 at strong coupling.
    assert!((floc[400] - 0.5).abs() < 1e-3 && (atr[400] - 0.5).abs() < 1e-3);
    assert!(floc[0] < 1e-7 && atr[0] < 1e-14);
}

#[test]
fn thresholds_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = cca(dir.path(), &["thresholds"]);
    assert_eq!(out.status.code(), Some(0));
    let m = manifest(dir.path());
    assert!((m.metrics["eta_floc"] - 0.38).abs() < 0.02);
    assert!((m.metrics["eta_atr"] - 0.90).abs() < 0.02);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("floc") && stdout.contains("atr"));

    let out = cca(dir.path(), &["thresholds", "--eps-c", "0.6"]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(manifest(dir.path()).status, "error");
}

#[test]
fn strong_coupling_emission_is_rabi_like() {
    let dir = tempfile::tempdir().unwrap();
    let out = cca(
        dir.path(),
        &["emit", "--eta", "10", "--tmax", "3", "--tsteps", "121"],
    );
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = table(&dir.path().join("emit.csv"));
    let t = column(&header, &rows, "t");
    let pe = column(&header, &rows, "p_e");
    let wp = (2.0f64 + (1e4f64 + 4.0).sqrt()).sqrt();
    // Rabi oscillation at ω₊ carried by the bound states, 2p_b ≈ 0.98 of the
    // atomic amplitude; the band part adds at most 1 − 2p_b.
    let pb = bound_state(&ModelParams::from_eta(10.0).unwrap(), Branch::Plus)
        .unwrap()
        .p_b;
    let delta = 1.0 - 2.0 * pb;
    let mut worst: f64 = 0.0;
    for (t, pe) in t.iter().zip(&pe) {
        let c2 = (wp * t).cos().powi(2);
        assert!(
            (pe - 4.0 * pb * pb * c2).abs() < 2.0 * delta + 0.01,
            "t={t}: {pe}"
        );
        worst = worst.max((pe - c2).abs());
    }
    assert!(worst < 0.08, "{worst}");
}

#[test]
fn manifest_round_trips_config_and_meets_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = cca(
        dir.path(),
        &[
            "field", "--eta", "2", "--tmax", "6", "--tsteps", "7", "--window", "20", "--tol",
            "1e-9",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let m = manifest(dir.path());
    assert_eq!(m.status, "ok");
    assert_eq!(m.exit_code, 0);
    assert_eq!(m.requested_tolerance, 1e-9);
    let achieved = m.achieved.clone().unwrap();
    assert!(achieved.quadrature_max_error <= 1e-9);
    let text = std::fs::read_to_string(dir.path().join("run.toml")).unwrap();
    assert_eq!(RunConfig::from_toml(&text).unwrap(), m.config);
    for f in &m.outputs {
        assert!(dir.path().join(f).exists(), "{f}");
    }

    // Re-running from the saved file reproduces the run.
    let again = tempfile::tempdir().unwrap();
    let out = cca(
        again.path(),
        &[
            "field",
            "--config",
            dir.path().join("run.toml").to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(dir.path().join("field_eta2.pgm")).unwrap(),
        std::fs::read(again.path().join("field_eta2.pgm")).unwrap()
    );
}

#[test]
fn output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["emit", "--etas", "0.4,2", "--tmax", "250", "--tsteps", "26"];
    assert_eq!(cca(a.path(), &args).status.code(), Some(0));
    assert_eq!(cca(b.path(), &args).status.code(), Some(0));
    assert_eq!(
        std::fs::read(a.path().join("emit.csv")).unwrap(),
        std::fs::read(b.path().join("emit.csv")).unwrap()
    );
}

#[test]
fn unreachable_tolerance_fails_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = cca(
        dir.path(),
        &["emit", "--eta", "0.8", "--tmax", "5", "--tol", "1e-300"],
    );
    assert_eq!(out.status.code(), Some(4));
    let m = manifest(dir.path());
    assert_eq!(m.status, "error");
    assert_eq!(m.exit_code, 4);
    assert!(m.error.unwrap().contains("quadrature"));
}

#[test]
fn bound_field_is_brightest_at_the_atom() {
    let dir = tempfile::tempdir().unwrap();
    let out = cca(
        dir.path(),
        &[
            "field", "--eta", "2", "--tmin", "30", "--tmax", "40", "--tsteps", "6", "--window",
            "15",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let bytes = std::fs::read(dir.path().join("field_eta2.pgm")).unwrap();
    let header = b"P5\n31 6\n65535\n";
    assert_eq!(&bytes[..header.len()], header);
    let px: Vec<u16> = bytes[header.len()..]
        .chunks(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    let column_sum = |c: usize| (0..6).map(|r| px[r * 31 + c] as u64).sum::<u64>();
    let brightest = (0..31).max_by_key(|&c| column_sum(c)).unwrap();
    assert_eq!(brightest as i64 - 15, 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cca(dir.path(), &["emit", "--bogus"]).status.code(), Some(2));
    assert_eq!(cca(dir.path(), &["emit", "--J=-1"]).status.code(), Some(3));
    let out = cca(
        dir.path(),
        &[
            "validate",
            "--oracle-N",
            "64",
            "--tmax",
            "50",
            "--window",
            "5",
        ],
    );
    assert_eq!(out.status.code(), Some(5));
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    assert_eq!(
        cca(&blocker.join("sub"), &["spectrum"]).status.code(),
        Some(7)
    );
}

#[test]
fn small_ring_validation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = cca(
        dir.path(),
        &[
            "validate",
            "--etas",
            "0.8,2",
            "--oracle-N",
            "160",
            "--tmax",
            "20",
            "--tsteps",
            "11",
            "--window",
            "15",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let m = manifest(dir.path());
    assert!(m.metrics["max_alpha_deviation_eta2"] < 1e-8);

    let out = cca(
        dir.path(),
        &[
            "validate",
            "--oracle-N",
            "64",
            "--tmax",
            "10",
            "--tsteps",
            "3",
            "--window",
            "5",
            "--check-tol",
            "1e-20",
        ],
    );
    assert_eq!(out.status.code(), Some(6));
    assert_eq!(manifest(dir.path()).status, "failed");
}
