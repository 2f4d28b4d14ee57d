use std::process::Command;

use arbor_cli::{parse_args, parse_config_file, run, CliError, Format, EXIT_USAGE};
use arbor_core::PCOrbit;
use serde_json::Value;

fn arbor(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_arbor")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn usage(args: &[&str]) -> String {
    let mut argv = vec!["arbor"];
    argv.extend_from_slice(args);
    match parse_args(argv) {
        Err(e) => {
            assert_eq!(e.exit_code(), EXIT_USAGE, "{e}");
            e.to_string()
        }
        Ok(cfg) => panic!("expected usage error, got {cfg:?}"),
    }
}

#[test]
fn parses_odometer_config() {
    let cfg = parse_args(["arbor", "odometer", "--r", "8", "--s", "7"]).unwrap();
    assert_eq!(cfg.command, arbor_cli::Command::Odometer);
    assert_eq!(cfg.orbit, Some(PCOrbit::new(8, 7).unwrap()));
    assert_eq!(cfg.format, Format::Json);
    assert_eq!(cfg.seed, 0);
}

#[test]
fn usage_errors() {
    assert!(usage(&["odometer", "--r", "2", "--s", "2"]).contains("r >= 3"));
    assert!(usage(&["frobenius", "--p", "4"]).contains("not an odd prime"));
    assert!(usage(&["frobenius", "--p", "7", "--map", "x^3"]).contains("degree"));
    assert!(usage(&["frobenius", "--p", "7", "--map", "1/(x-"]).contains("malformed"));
    assert!(usage(&["frobenius", "--p", "7", "--a", "9"]).contains("residue"));
    assert!(usage(&["odometer", "--r", "4"]).contains("--s"));
    assert!(usage(&["gens", "--r", "4", "--s", "2", "--level", "99"]).contains("exceeds"));
    assert!(matches!(
        parse_args(["arbor", "odometer", "--bogus"]),
        Err(CliError::Clap(_))
    ));
}

#[test]
fn binary_exit_codes() {
    let (code, stdout, _) = arbor(&["odometer", "--r", "8", "--s", "7"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["exists"], true);
    assert_eq!(v["witness"], serde_json::json!([1, 5, 2, 6]));
    assert_eq!(v["certified_level"], 12);
    assert_eq!(v["r"], 8);
    assert_eq!(v["method"], "criterion");

    let (code, _, stderr) = arbor(&["odometer", "--r", "2", "--s", "2"]);
    assert_eq!(code, 2, "{stderr}");
    let (code, _, _) = arbor(&["frobenius", "--p", "4"]);
    assert_eq!(code, 2);
    let (code, _, _) = arbor(&["nonsense"]);
    assert_eq!(code, 2);
}

#[test]
fn failed_checks_exit_one() {
    // base point 0 is post-critical for 1/(x-1)^2
    let (code, stdout, stderr) = arbor(&["frobenius", "--p", "5", "--a", "0", "--depth", "3"]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["passed"], false);
    assert!(v["errors"][0].as_str().unwrap().contains("post-critical"));
    assert!(stderr.contains("check failed"));
}

#[test]
fn group_csv_rows() {
    let (code, stdout, _) = arbor(&["group", "--r", "3", "--s", "2", "--max-level", "2", "--quotients"]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(stdout.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "n",
            "group_order",
            "i",
            "normal_order",
            "quotient_order",
            "cyclic",
            "checks_passed"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 9);
    let level2: Vec<_> = rows.iter().filter(|r| &r[0] == "2").collect();
    assert_eq!(level2.len(), 3);
    assert!(level2.iter().all(|r| &r[1] == "8" && &r[6] == "true"));
    let i1 = level2.iter().find(|r| &r[2] == "1").unwrap();
    assert_eq!(&i1[4], "2");
}

#[test]
fn group_abelianization_rows() {
    let (code, stdout, _) = arbor(&["group", "--r", "3", "--s", "2", "--max-level", "4", "--abelianization"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().filter(|l| l.contains(",ab,")).count(), 5);
}

#[test]
fn frobenius_json_shape() {
    let (code, stdout, _) = arbor(&[
        "frobenius",
        "--p",
        "5",
        "--a",
        "2",
        "--map",
        "1/(x-1)^2",
        "--depth",
        "8",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["errors"], serde_json::json!([]));
    let levels = v["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 9);
    assert_eq!(levels[1]["cycle_type"], serde_json::json!([2]));
    assert_eq!(levels[7]["stable_proportion"], 0.34375);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["config"]["map"], "1/(x-1)^2");
}

#[test]
fn settled_json_shape() {
    let (code, stdout, _) = arbor(&[
        "settled", "--r", "4", "--s", "2", "--word", "a1 a3", "--level", "3", "--depth", "10",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["proportion"], 1.0);
    assert_eq!(v["probe_depth"], 10);
    assert_eq!(v["cycles"].as_array().unwrap().len(), 1);
    assert_eq!(v["cycles"][0]["length"], 8);
    assert!(v.get("seed").is_some());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "# sweep\nr = 4\ns = 2\nlevel = 6\nseed = 9\n").unwrap();
    let p = path.to_str().unwrap();
    let cfg = parse_args(["arbor", "--config", p, "odometer", "--level", "8"]).unwrap();
    assert_eq!(cfg.orbit, Some(PCOrbit::new(4, 2).unwrap()));
    assert_eq!(cfg.level, Some(8));
    assert_eq!(cfg.seed, 9);

    assert!(parse_config_file("colour = red").is_err());
    assert!(parse_config_file("r 4").is_err());
    let m = parse_config_file("max_level = 3 # trailing\n\n").unwrap();
    assert_eq!(m["max-level"], "3");
}

#[test]
fn out_file_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("signs.json");
    let (code, stdout, _) = arbor(&["signs", "--r", "5", "--s", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v.get("wall_clock_ms").is_none());

    let cfg = parse_args(["arbor", "--timing", "signs", "--r", "5", "--s", "3"]).unwrap();
    let (bytes, _) = run(&cfg).unwrap();
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert!(v["wall_clock_ms"].is_u64());
}

#[test]
fn reports_are_deterministic() {
    let args = ["gens", "--r", "6", "--s", "4", "--seed", "5"];
    assert_eq!(arbor(&args).1, arbor(&args).1);
    let (_, stdout, _) = arbor(&args);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["tool"], "arbor");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["command"], "gens");
    assert_eq!(v["generators"][0]["name"], "a1");
    assert_eq!(v["generators"][0]["left"], "a6");
}

#[test]
fn verify_all_small() {
    let (code, stdout, stderr) = arbor(&[
        "verify-all",
        "--r",
        "4",
        "--s",
        "3",
        "--max-level",
        "6",
        "--depth",
        "10",
        "--samples",
        "50",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let names: Vec<&str> = stdout.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    for expected in [
        "relation",
        "sign_closed_form",
        "odometer_criterion_matches_search",
        "quotients_i1",
    ] {
        assert!(names.contains(&expected), "{names:?}");
    }
    // s = 3 has no abelianization check
    assert!(!names.contains(&"abelianization"));
}

#[test]
fn env_level_cap() {
    let out = Command::new(env!("CARGO_BIN_EXE_arbor"))
        .args(["gens", "--r", "4", "--s", "2", "--level", "8"])
        .env("ARBOR_MAX_LEVEL", "6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
