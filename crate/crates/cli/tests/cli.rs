use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn waverom(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waverom"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

#[test]
fn synthesize_two_layer_writes_fifty_samples_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    ok(&waverom(
        &["synthesize", "--model", "two-layer", "--sigma", "0.01", "--tau-over-sigma", "2.5", "--n", "25", "--output", "d"],
        dir.path(),
    ));
    let path = dir.path().join("d/data.csv");
    let rows = data_rows(&path);
    assert_eq!(rows[0], "tau,sigma,n");
    assert_eq!(rows.len(), 2 + 50);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("# model_sha256="));
    assert!(text.contains("# tau_over_sigma=2.5"));
}

#[test]
fn constant_model_series_has_positive_mass() {
    let dir = tempfile::tempdir().unwrap();
    ok(&waverom(&["synthesize", "--model", "constant", "--n", "10", "--output", "d"], dir.path()));
    let rows = data_rows(&dir.path().join("d/data.csv"));
    assert_eq!(rows.len(), 2 + 20);
    assert!(rows[2].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn synthesize_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        ok(&waverom(&["synthesize", "--model", "two-layer", "--output", out], dir.path()));
    }
    let a = fs::read(dir.path().join("a/data.csv")).unwrap();
    let b = fs::read(dir.path().join("b/data.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_drives_synthesis() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.cfg"), "# run\nmodel=constant\nn = 7\noutput=fromfile\n").unwrap();
    ok(&waverom(&["synthesize", "--config", "exp.cfg"], dir.path()));
    assert_eq!(data_rows(&dir.path().join("fromfile/data.csv")).len(), 2 + 14);
}

#[test]
fn constant_round_trip_and_two_layer_node_rows() {
    let dir = tempfile::tempdir().unwrap();
    ok(&waverom(&["synthesize", "--model", "constant", "--output", "c"], dir.path()));
    ok(&waverom(&["invert", "--data", "c/data.csv", "--output", "rc"], dir.path()));
    let rows = data_rows(&dir.path().join("rc/inversion.csv"));
    assert_eq!(rows[0], "node_type,traveltime_pos,physical_pos,v_estimate");
    for r in &rows[1..] {
        let v: f64 = r.split(',').nth(3).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{r}");
    }

    ok(&waverom(&["synthesize", "--model", "two-layer", "--n", "25", "--output", "t"], dir.path()));
    ok(&waverom(&["invert", "--data", "t/data.csv", "--output", "rt"], dir.path()));
    assert_eq!(data_rows(&dir.path().join("rt/inversion.csv")).len(), 1 + 50);
    let diag = fs::read_to_string(dir.path().join("rt/diagnostics.csv")).unwrap();
    assert!(diag.contains("cond_uu"));
    assert!(diag.contains("monotone"));
}

#[test]
fn small_time_step_reports_large_condition_number() {
    let dir = tempfile::tempdir().unwrap();
    ok(&waverom(&["synthesize", "--model", "two-layer", "--tau-over-sigma", "0.5", "--output", "d"], dir.path()));
    let out = waverom(&["invert", "--data", "d/data.csv", "--output", "r"], dir.path());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let reported = stderr
        .split("cond(U*U) = ")
        .nth(1)
        .and_then(|s| s.split([' ', ';']).next())
        .and_then(|s| s.parse::<f64>().ok())
        .expect("condition number reported");
    assert!(reported >= 1e8, "{stderr}");
    assert!(stderr.contains("decrease it until cond"));
}

#[test]
fn invalid_parameters_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = waverom(&["synthesize", "--model", "two-layer", "--n", "60"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid n"));

    let out = waverom(&["synthesize", "--tau-over-sigma", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau_over_sigma"));

    let out = waverom(&["invert", "--data", "missing.csv"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn tau_sweep_rows_and_trend() {
    let dir = tempfile::tempdir().unwrap();
    ok(&waverom(
        &["tau-sweep", "--model", "two-layer", "--taus", "0.5,2.5,3.5", "--n", "23", "--workers", "3", "--output", "s.csv"],
        dir.path(),
    ));
    let rows = data_rows(&dir.path().join("s.csv"));
    assert_eq!(rows.len(), 4);
    let cond: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(cond[0] > cond[1] && cond[1] > cond[2], "{cond:?}");

    ok(&waverom(&["tau-sweep", "--model", "constant", "--taus", "2.5", "--n", "10", "--output", "one.csv"], dir.path()));
    assert_eq!(data_rows(&dir.path().join("one.csv")).len(), 2);
}

#[test]
fn tau_sweep_on_constant_model_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    ok(&waverom(
        &["tau-sweep", "--model", "constant", "--taus", "1,2.5,3.5", "--n", "20", "--workers", "2", "--output", "s.csv"],
        dir.path(),
    ));
    for r in &data_rows(&dir.path().join("s.csv"))[1..] {
        let cols: Vec<&str> = r.split(',').collect();
        assert_eq!(cols[6], "ok", "{r}");
        assert!(cols[5].parse::<f64>().unwrap() < 1e-6, "{r}");
    }
}

#[test]
fn plot_data_panels() {
    let dir = tempfile::tempdir().unwrap();
    ok(&waverom(&["synthesize", "--model", "two-layer", "--n", "12", "--m", "800", "--output", "d"], dir.path()));
    ok(&waverom(&["invert", "--data", "d/data.csv", "--m", "800", "--output", "r"], dir.path()));
    ok(&waverom(&["plot-data", "--results", "r", "--output", "p"], dir.path()));

    let snaps = data_rows(&dir.path().join("p/snapshots.csv"));
    assert_eq!(snaps.len(), 1 + 800);
    assert_eq!(snaps[1].split(',').count(), 12);
    let com = data_rows(&dir.path().join("p/centers_of_mass.csv"));
    assert_eq!(com[0], "j,true,reference,approximated_physical");
    assert_eq!(com.len(), 1 + 12);
    assert!(dir.path().join("p/ortho_primary.csv").exists());
    assert!(dir.path().join("p/node_estimates.csv").exists());

    fs::create_dir(dir.path().join("empty")).unwrap();
    let out = waverom(&["plot-data", "--results", "empty", "--output", "q"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("results"));
}

#[test]
fn rom_subcommand_writes_debug_tables() {
    let dir = tempfile::tempdir().unwrap();
    ok(&waverom(&["synthesize", "--model", "constant", "--n", "6", "--output", "d"], dir.path()));
    ok(&waverom(&["rom", "--data", "d/data.csv", "--output", "rom"], dir.path()));
    assert_eq!(data_rows(&dir.path().join("rom/gram.csv")).len(), 1 + 2 * 36);
    assert_eq!(data_rows(&dir.path().join("rom/jacobi.csv")).len(), 1 + 6);
}

#[test]
fn two_dimensional_round_trip_on_uniform_medium() {
    let dir = tempfile::tempdir().unwrap();
    ok(&waverom(
        &[
            "synthesize", "--mode", "2d", "--model", "constant", "--nx", "60", "--ny", "40", "--sigma", "0.03", "--n", "5",
            "--sources", "3", "--aperture", "0.1", "--output", "d",
        ],
        dir.path(),
    ));
    ok(&waverom(&["invert2d", "--data", "d/data", "--reference-nodes", "600", "--output", "r"], dir.path()));
    let rows = data_rows(&dir.path().join("r/inversion2d.csv"));
    assert_eq!(rows.len(), 1 + 3 * 2 * 5);
    for r in &rows[1..] {
        let v: f64 = r.split(',').nth(4).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{r}");
    }
}
