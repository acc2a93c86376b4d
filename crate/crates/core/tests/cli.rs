use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use warpcheck::report::Report;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn warpcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warpcheck"))
        .args(args)
        .env_remove("WARPCHECK_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const FLAGSHIP: &str = "flagship_h3_inverse_height.json";

#[test]
fn text_report_for_flagship() {
    let path = scenario(FLAGSHIP);
    let o = warpcheck(&["run", path.to_str().unwrap(), "--samples", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("einstein")).unwrap();
    assert!(row.ends_with("PASS"), "{row}");
    assert!(text.contains("lambda = -4"), "{text}");
}

#[test]
fn json_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let path = scenario(FLAGSHIP);
    let o = warpcheck(&[
        "run",
        path.to_str().unwrap(),
        "--samples",
        "10",
        "--format",
        "json",
        "--report",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let written = std::fs::read_to_string(&out).unwrap();
    let report = Report::from_json(&written).unwrap();
    assert_eq!(report.to_json(), written);
    let value: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["schema", "scenario", "derived_constants", "checks", "timings"] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
    assert_eq!(value["derived_constants"]["lambda"], -4.0);
    for check in value["checks"].as_array().unwrap() {
        assert!(check["pass"].as_bool().unwrap());
    }
}

#[test]
fn negative_scenario_exits_one() {
    let path = scenario("negative_height_warp.json");
    let o = warpcheck(&["run", path.to_str().unwrap(), "--samples", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn tolerance_override_flips_verdict() {
    let path = scenario(FLAGSHIP);
    let o = warpcheck(&[
        "run",
        path.to_str().unwrap(),
        "--samples",
        "5",
        "--tolerance",
        "einstein=0",
    ]);
    // exact zero residual is not attainable in floating point
    assert_eq!(o.status.code(), Some(1));
    let o = warpcheck(&["run", path.to_str().unwrap(), "--tolerance", "bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = warpcheck(&["run", path.to_str().unwrap(), "--tolerance", "einstein"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn list_models_names_every_kind() {
    let o = warpcheck(&["list-models"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for kind in ["hyperbolic", "euclidean", "space_form"] {
        assert!(text.lines().any(|l| l.starts_with(kind)), "{kind}");
    }
}

#[test]
fn check_params_skips_curvature() {
    let path = scenario("corollary4_negative_fiber.json");
    let o = warpcheck(&["check-params", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let report = Report::from_json(&stdout(&o)).unwrap();
    let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["corollary4"]);
    assert_eq!(report.derived_constants.c, Some(-12.0));

    let path = scenario("negative_published_constant.json");
    let o = warpcheck(&["check-params", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_input_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"schema\": \"warpcheck-scenario/1\",\n  \"name\": \n}").unwrap();
    let o = warpcheck(&["run", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4"), "{err}");

    let text = std::fs::read_to_string(scenario(FLAGSHIP))
        .unwrap()
        .replace("\"kind\": \"euclidean\"", "\"kind\": \"torus\"");
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, text).unwrap();
    assert_eq!(warpcheck(&["run", unknown.to_str().unwrap()]).status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    assert_eq!(warpcheck(&["run", missing.to_str().unwrap()]).status.code(), Some(2));

    let path = scenario(FLAGSHIP);
    let o = warpcheck(&["run", path.to_str().unwrap(), "--samples", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_comes_from_flag_then_file_then_environment() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario(FLAGSHIP))
        .unwrap()
        .replace(", \"seed\": 42", "");
    let unseeded = dir.path().join("unseeded.json");
    std::fs::write(&unseeded, text).unwrap();
    let seed_of = |o: &Output| {
        let r = Report::from_json(&stdout(o)).unwrap();
        r.scenario.sampling.seed.unwrap()
    };
    let base = ["run", unseeded.to_str().unwrap(), "--format", "json", "--samples", "3"];

    assert_eq!(seed_of(&warpcheck(&base)), 42);
    let env = Command::new(env!("CARGO_BIN_EXE_warpcheck"))
        .args(base)
        .env("WARPCHECK_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(seed_of(&env), 9);
    let flag = Command::new(env!("CARGO_BIN_EXE_warpcheck"))
        .args(base)
        .args(["--seed", "5"])
        .env("WARPCHECK_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(seed_of(&flag), 5);
    let seeded = scenario(FLAGSHIP);
    let file = Command::new(env!("CARGO_BIN_EXE_warpcheck"))
        .args(["run", seeded.to_str().unwrap(), "--format", "json", "--samples", "3"])
        .env("WARPCHECK_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(seed_of(&file), 42);

    let bad = Command::new(env!("CARGO_BIN_EXE_warpcheck"))
        .args(base)
        .env("WARPCHECK_SEED", "nine")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn different_seeds_sample_different_points() {
    let path = scenario(FLAGSHIP);
    let run = |seed: &str| {
        let o = warpcheck(&["run", path.to_str().unwrap(), "--format", "json", "--samples", "5", "--seed", seed]);
        let mut v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        v.as_object_mut().unwrap().remove("timings");
        v["checks"].to_string()
    };
    assert_eq!(run("1"), run("1"));
    assert_ne!(run("1"), run("2"));
}

#[test]
fn nonpositive_warp_is_a_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("negative_height_warp.json"))
        .unwrap()
        .replace("\"x3\"", "\"x1\"");
    let path = dir.path().join("signed.json");
    std::fs::write(&path, text).unwrap();
    let o = warpcheck(&["run", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(3));
    let report = Report::from_json(&stdout(&o)).unwrap();
    let kinds: Vec<&str> = report
        .checks
        .iter()
        .filter_map(|c| c.error.as_ref().map(|e| e.kind.as_str()))
        .collect();
    assert!(kinds.contains(&"DomainViolation"), "{kinds:?}");
}
