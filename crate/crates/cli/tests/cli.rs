use std::path::PathBuf;
use std::process::Command;

fn legfol() -> Command {
    Command::new(env!("CARGO_BIN_EXE_legfol"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("legfol-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios")
}

/// Blanks out wall times, the only field allowed to differ between runs.
fn untimed(json: &str) -> String {
    json.lines()
        .map(|l| {
            if l.trim_start().starts_with("\"wall_time_ms\"") {
                "\"wall_time_ms\": _"
            } else {
                l
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn check_writes_schema_1_json_and_exits_zero() {
    let out = scratch("claims.json");
    let status = legfol()
        .arg("check")
        .arg(scenario_dir().join("claim-identities-n2.scn"))
        .arg("--json")
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"schema\": 1"));
    assert!(text.contains("\"passed\": true"));
}

#[test]
fn json_is_deterministic_modulo_timing() {
    let run = |file: &str| {
        let out = scratch(file);
        let status = legfol()
            .args(["check", "--seed", "17", "--json"])
            .arg(&out)
            .arg(scenario_dir().join("counterexample.scn"))
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        untimed(&std::fs::read_to_string(out).unwrap())
    };
    assert_eq!(run("det-a.json"), run("det-b.json"));
}

#[test]
fn failing_scenario_exits_nonzero() {
    let path = scratch("fails.scn");
    std::fs::write(
        &path,
        "scenario fails\nn = 2\nk = 3\n\n[graph C]\ny1 = x1*x2\n\n[check coisotropy_residuals]\ngraph = C\ngrid = random(-1..1, 10)\n",
    )
    .unwrap();
    let out = legfol().arg("check").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("overall: FAIL"));
}

#[test]
fn tol_override_can_fail_a_passing_scenario() {
    let out = legfol()
        .args(["check", "--tol", "1e-30"])
        .arg(scenario_dir().join("flat-bundles.scn"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn parse_errors_are_located_and_exit_two() {
    let path = scratch("bad.scn");
    std::fs::write(&path, "scenario bad\nn = 1\nk = 2\n\n[chart C]\ncoords = x1 y1\n\n[form w]\nchart = C\nexpr = y1*dx1 +\n").unwrap();
    let out = legfol().arg("check").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":10:"), "{err}");
}

#[test]
fn demo_runs_bundled_scenarios() {
    let list = legfol().args(["demo", "list"]).output().unwrap();
    let names = String::from_utf8(list.stdout).unwrap();
    assert_eq!(names.lines().count(), 11);
    for name in names.lines() {
        let status = legfol()
            .args(["demo", name])
            .env("LEGFOL_THREADS", "2")
            .output()
            .unwrap()
            .status;
        assert!(status.success(), "{name}");
    }
    let unknown = legfol().args(["demo", "nope"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(2));
}
