use std::path::Path;
use std::process::Command;

fn qnoise(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qnoise"))
        .args(args)
        .arg("--out")
        .arg(out)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap()
}

#[test]
fn every_command_writes_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["spectrum", "corr", "decompose", "synth", "qsi", "verify"] {
        let o = qnoise(&[cmd, "--config", "configs/mixed.toml"], dir.path());
        assert_eq!(
            o.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    for file in [
        "spectrum.csv",
        "correlation.csv",
        "model_spectrum.csv",
        "decomposition.csv",
        "decomposition.json",
        "modular_kernels.csv",
        "synthesis.csv",
        "filter_kernels.csv",
        "qsi.json",
        "verify.json",
    ] {
        assert!(dir.path().join(file).is_file(), "{file}");
    }
    let verify: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("verify.json")).unwrap()).unwrap();
    let entries = verify.as_array().unwrap();
    assert!(!entries.is_empty());
    assert!(entries.iter().all(|e| e["pass"] == true));
}

#[test]
fn mode_prints_thermal_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnoise(&["mode", "--n", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["brev_b_dag"].as_f64().unwrap() - 6f64.sqrt()).abs() < 1e-12);
    assert_eq!(
        std::fs::read(dir.path().join("mode.json")).unwrap(),
        o.stdout
    );
    assert_eq!(
        qnoise(&["mode", "--n", "-1"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn tight_tolerance_fails_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnoise(
        &[
            "verify",
            "--config",
            "configs/planck.toml",
            "--tol",
            "1e-300",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let o = qnoise(
        &["verify", "--config", "configs/planck.toml", "--tol", "-1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qnoise(&["verify"], dir.path()).status.code(), Some(2));
    assert_eq!(qnoise(&["bogus"], dir.path()).status.code(), Some(2));
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn planck_spectrum_rows_follow_detailed_balance() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnoise(&["spectrum", "--config", "configs/planck.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 65);
    let nu = column(&header, &rows, "nu");
    let kappa = column(&header, &rows, "kappa");
    let kappa_rev = column(&header, &rows, "kappa_rev");
    assert!(nu.windows(2).all(|w| w[0] < w[1]));
    for k in 0..rows.len() {
        assert!(
            (kappa_rev[k] - kappa[k] - nu[k]).abs() < 1e-12,
            "nu = {}",
            nu[k]
        );
    }
}

#[test]
fn white_synthesis_has_unit_filter() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnoise(&["synth", "--config", "configs/white.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&dir.path().join("synthesis.csv"));
    assert!(column(&header, &rows, "f").iter().all(|&f| f == 1.0));
}

#[test]
fn planck_synthesis_summary_is_small() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnoise(&["synth", "--config", "configs/planck.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let err: f64 = text.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(err <= 1e-10, "{text}");
}

#[test]
fn vacuum_synthesis_reports_errors_on_supported_points_only() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("vacuum.toml");
    std::fs::write(
        &config,
        "model = \"tabulated\"\nn_points = 9\nstep = 0.5\nvalues = [1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]\n",
    )
    .unwrap();
    let o = qnoise(&["synth", "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let (header, rows) = read_csv(&dir.path().join("synthesis.csv"));
    let i = header.iter().position(|h| h == "relative_error").unwrap();
    let target = column(&header, &rows, "kappa_target");
    for (row, t) in rows.iter().zip(target) {
        assert_eq!(row[i].is_empty(), t == 0.0);
    }
}
