use std::path::Path;
use std::process::Command;

fn ltve(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ltve"))
        .current_dir(dir)
        .env_remove("LTVE_WORKERS")
        .args(args)
        .output()
        .expect("spawn ltve");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

const GYRE: &[&str] = &["--field", "double-gyre", "--delta", "0.05", "--T", "3", "--k", "12"];

fn with(base: &[&str], extra: &[&'static str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run_args(dir: &Path, args: &[String]) -> (i32, String, String) {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    ltve(dir, &refs)
}

#[test]
fn worker_count_does_not_change_output_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for (w, name) in [("1", "w1"), ("8", "w8")] {
        let mut args = vec!["run".to_string()];
        args.extend(with(GYRE, &["--format", "fld", "--workers"]));
        args.push(w.into());
        args.extend(["--output".into(), name.into()]);
        let (code, _, err) = run_args(dir.path(), &args);
        assert_eq!(code, 0, "{err}");
    }
    let a = std::fs::read(dir.path().join("w1.fld")).unwrap();
    let b = std::fs::read(dir.path().join("w8.fld")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn circular_csv_leaves_static_cells_empty() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = ltve(
        dir.path(),
        &["run", "--field", "circular", "--delta", "0.2", "--k", "10", "--output", "ring.csv"],
    );
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(dir.path().join("ring.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# LTVE n=2 dims=21,21"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r.len() == 21));
    // The corner (-2,-2) sits far outside the band and never moves.
    assert_eq!(rows[0][0], "");
    assert!(rows.iter().flatten().any(|c| !c.is_empty()));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = ltve(dir.path(), &["run", "--k", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("--k"), "{err}");
    assert_eq!(ltve(dir.path(), &["run", "--no-such-flag"]).0, 1);
    assert_eq!(ltve(dir.path(), &["run", "--metric", "cosine"]).0, 1);
    assert_eq!(
        ltve(dir.path(), &["run", "--field", "zero", "--dim", "1", "--domain", "0,1", "--scheme", "third"]).0,
        1
    );
    let (code, _, _) = ltve(dir.path(), &["heatmap", "--input", "missing.fld", "--output", "x.pgm"]);
    assert_eq!(code, 3);
    let (code, _, _) = ltve(
        dir.path(),
        &["run", "--field", "double-gyre", "--delta", "0.1", "--k", "3", "--output", "no/such/dir/out.csv"],
    );
    assert_eq!(code, 3);
    assert_eq!(ltve(dir.path(), &["--help"]).0, 0);
}

#[test]
fn config_file_is_overridden_by_flags_and_env_applies() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# gyre\nfield=double-gyre\ndelta=0.1\nT=2\nk=6\nmetric=hausdorff\n",
    )
    .unwrap();
    let (code, out, err) = ltve(dir.path(), &["run", "--config", "run.cfg", "--metric", "frechet", "--output", "c"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("metric=frechet"), "{out}");
    assert!(out.contains("dims=[21, 11]"), "{out}");

    let out = Command::new(env!("CARGO_BIN_EXE_ltve"))
        .current_dir(dir.path())
        .env("LTVE_WORKERS", "lots")
        .args(["run", "--config", "run.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("LTVE_WORKERS"));
}

#[test]
fn cache_then_run_matches_direct_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["cache".to_string()];
    args.extend(with(GYRE, &["--output", "gyre.trj"]));
    assert_eq!(run_args(dir.path(), &args).0, 0);

    let mut direct = vec!["run".to_string()];
    direct.extend(with(GYRE, &["--format", "fld", "--output", "direct"]));
    assert_eq!(run_args(dir.path(), &direct).0, 0);
    let mut cached = vec!["run".to_string()];
    cached.extend(with(GYRE, &["--format", "fld", "--output", "cached", "--cache", "gyre.trj"]));
    let (code, _, err) = run_args(dir.path(), &cached);
    assert_eq!(code, 0, "{err}");
    assert_eq!(
        std::fs::read(dir.path().join("direct.fld")).unwrap(),
        std::fs::read(dir.path().join("cached.fld")).unwrap()
    );

    // A cache written for another window is refused.
    let (code, _, err) = ltve(
        dir.path(),
        &["run", "--field", "double-gyre", "--delta", "0.05", "--T", "3", "--k", "13", "--cache", "gyre.trj"],
    );
    assert_eq!(code, 1, "{err}");
}

#[test]
fn compare_ftle_writes_report_and_heatmap_renders() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run".to_string()];
    args.extend(with(GYRE, &["--compare-ftle", "--format", "both", "--output", "g"]));
    let (code, out, err) = run_args(dir.path(), &args);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("theoretical_bound="));
    let report = std::fs::read_to_string(dir.path().join("g-bound.txt")).unwrap();
    for key in ["lambda_star=", "eta_star=", "observed_max_diff=", "pass=", "ftle_max_abs=", "ltve_p90="] {
        assert!(report.contains(key), "{key} missing from {report}");
    }
    assert!(dir.path().join("g-ftle.fld").exists());

    for input in ["g.fld", "g.csv"] {
        let (code, _, err) = ltve(dir.path(), &["heatmap", "--input", input, "--output", "g.pgm"]);
        assert_eq!(code, 0, "{err}");
        let pgm = std::fs::read(dir.path().join("g.pgm")).unwrap();
        assert!(pgm.starts_with(b"P5\n41 21\n255\n"));
        assert_eq!(pgm.len(), b"P5\n41 21\n255\n".len() + 41 * 21);
    }
}

#[test]
fn bound_sweep_prints_one_block_per_duration() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = ltve(
        dir.path(),
        &["bound", "--field", "double-gyre", "--delta", "0.1", "--sweep-T", "1,2,3"],
    );
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.matches("theoretical_bound=").count(), 3);
    assert!(!out.contains("pass=false"), "{out}");
}

#[test]
fn streaming_run_reports_residency() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run".to_string()];
    args.extend(with(GYRE, &["--storage", "streaming", "--output", "s"]));
    let (code, out, err) = run_args(dir.path(), &args);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("peak_resident_trajectories="), "{out}");
}
