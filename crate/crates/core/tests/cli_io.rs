use std::fs;
use std::path::Path;

use gaussian_minkowski::cli::run;
use gaussian_minkowski::geometry::{build_grid, Resolution, SupportField};
use gaussian_minkowski::io::{
    read_body, read_json, trace_csv, write_body, write_json, BodyFile, DensitySpec, SolveReportFile, TRACE_HEADER,
};
use gaussian_minkowski::solver::TracePoint;
use gaussian_minkowski::verification::random_even_body;
use gaussian_minkowski::Error;

fn gmink(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("gmink").chain(args.iter().copied());
    let code = run(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map(|it| it.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect())
        .unwrap_or_default();
    names.sort();
    names
}

#[test]
fn body_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (dim, res) in [
        (2, Resolution::Circle { n: 64 }),
        (3, Resolution::Sphere { n_lat: 8, n_lon: 16 }),
    ] {
        let grid = build_grid(dim, res).unwrap();
        let h = random_even_body(&grid, 1.5, 4, 0.3).unwrap();
        let path = dir.path().join(format!("body{dim}.json"));
        write_body(&path, &h).unwrap();
        let back = read_body(&path).unwrap();
        assert_eq!(back.values(), h.values());
        assert_eq!(back.p(), h.p());
        assert_eq!(back.grid().resolution(), h.grid().resolution());
        assert_eq!(read_json::<BodyFile>(&path).unwrap(), BodyFile::from_field(&h));
    }
}

#[test]
fn csv_trace_has_header_and_one_row_per_point() {
    let trace: Vec<TracePoint> = [0.0, 0.5, 1.0]
        .iter()
        .map(|&t| TracePoint {
            t,
            gamma_n: 0.1,
            residual_sup: 1e-12,
            newton_steps: 2,
        })
        .collect();
    let csv = trace_csv(&trace);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], TRACE_HEADER);
    assert_eq!(lines[0], "t,gamma_n,residual_sup");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[2].split(',').next().unwrap().parse::<f64>().unwrap(), 0.5);
}

#[test]
fn newer_schema_is_an_explicit_error() {
    let dir = tempfile::tempdir().unwrap();
    let grid = build_grid(2, Resolution::Circle { n: 16 }).unwrap();
    let mut file = BodyFile::from_field(&SupportField::ball(grid, 1.0, 1.0).unwrap());
    file.schema_version = 2;
    let path = dir.path().join("future.json");
    write_json(&path, &file).unwrap();
    assert!(matches!(
        read_body(&path),
        Err(Error::SchemaVersion { found: 2, expected: 1 })
    ));
    assert!(matches!(read_body(&dir.path().join("missing.json")), Err(Error::Io(_))));
}

#[test]
fn density_spec_json_forms() {
    let spec: DensitySpec = serde_json::from_str(r#"{"kind": "family", "name": "cosine_even", "params": {"c": 0.04, "a1": 0.1}}"#).unwrap();
    assert_eq!(spec, DensitySpec::parse("cosine_even:c=0.04,a1=0.1").unwrap());
    let grid = build_grid(2, Resolution::Circle { n: 8 }).unwrap();
    let samples: DensitySpec = serde_json::from_str(r#"{"kind": "samples", "values": [1, 2, 3, 4, 1, 2, 3, 4]}"#).unwrap();
    assert!(samples.to_density(&grid).is_ok());
    let odd: DensitySpec = serde_json::from_str(r#"{"kind": "samples", "values": [1, 2, 3, 4, 5, 6, 7, 8]}"#).unwrap();
    assert!(odd.to_density(&grid).is_err());
}

#[test]
fn threshold_command() {
    let (code, out) = gmink(&["threshold", "--n", "3", "--p", "1"]);
    assert_eq!(code, 0);
    assert!(out.contains("isotropic threshold: 0.735759"), "{out}");
    assert!(out.contains("L1 mass threshold: 0.398942"), "{out}");
}

#[test]
fn usage_errors_exit_2_and_help_exits_0() {
    assert_eq!(gmink(&["frobnicate"]).0, 2);
    assert_eq!(gmink(&["threshold", "--bogus"]).0, 2);
    assert_eq!(gmink(&["solve", "--density", "nonsense:1"]).0, 2);
    assert_eq!(gmink(&["solve", "--density", "constant:0.04", "--grid", "7"]).0, 2);
    assert_eq!(gmink(&["--help"]).0, 0);
    assert_eq!(gmink(&["--version"]).0, 0);
}

#[test]
fn mismatched_body_file_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let body = dir.path().join("bad.json");
    fs::write(
        &body,
        r#"{"schema_version": 1, "dim": 2, "grid": [16], "p": 1.0, "values": [1.0, 1.0, 1.0]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    for cmd in ["volume", "measure"] {
        let (code, _) = gmink(&[cmd, body.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 2);
        assert!(!out.exists());
    }
}

#[test]
fn solve_both_writes_artifacts_and_is_byte_stable() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let (code, out) = gmink(&[
            "solve", "--n", "2", "--p", "1", "--grid", "128", "--density", "constant:0.04", "--branch", "both", "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{out}");
    }
    let names = files_in(dirs[0].path());
    assert_eq!(
        names,
        ["body_large.json", "body_small.json", "report_large.json", "report_small.json", "trace_large.csv", "trace_small.csv"]
    );
    for name in &names {
        assert_eq!(
            fs::read(dirs[0].path().join(name)).unwrap(),
            fs::read(dirs[1].path().join(name)).unwrap(),
            "{name}"
        );
    }
    let small: SolveReportFile = read_json(&dirs[0].path().join("report_small.json")).unwrap();
    let large: SolveReportFile = read_json(&dirs[0].path().join("report_large.json")).unwrap();
    assert!((small.gamma_n - 0.0332).abs() < 1e-4);
    assert!((large.gamma_n - 0.8773).abs() < 1e-4);
    let csv = fs::read_to_string(dirs[0].path().join("trace_small.csv")).unwrap();
    assert_eq!(csv.lines().count(), small.homotopy_trace.len() + 1);
}

#[test]
fn solve_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    // 2π·0.12 exceeds e^{-1/2}: no isotropic start
    let (code, _) = gmink(&[
        "solve", "--grid", "32", "--density", "constant:0.12", "--branch", "small", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(files_in(dir.path()).is_empty());
}

#[test]
fn other_subcommands_run() {
    let dir = tempfile::tempdir().unwrap();
    let grid = build_grid(2, Resolution::Circle { n: 64 }).unwrap();
    let body = dir.path().join("body.json");
    write_body(&body, &SupportField::ball(grid, 1.0, 1.0).unwrap()).unwrap();
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    assert_eq!(gmink(&["volume", body.to_str().unwrap(), "--samples", "20000", "--out", o]).0, 0);
    assert_eq!(gmink(&["measure", body.to_str().unwrap(), "--out", o]).0, 0);
    assert_eq!(gmink(&["isotropic", "--n", "3", "--p", "1", "--C", "0.5", "--out", o]).0, 0);
    assert_eq!(
        gmink(&["verify", "isoperimetric", "--grid", "64", "--trials", "5", "--seed", "3", "--out", o]).0,
        0
    );
    assert_eq!(files_in(&out), ["isoperimetric_n2_p1.json", "isotropic.json", "measure.json", "volume.json"]);
    let (code, text) = gmink(&["verify", "constancy", "--trials", "4", "--C", "0.25"]);
    assert_eq!(code, 0, "{text}");
}
