use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sqmzoo"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_scenario(path: &Path, report: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", path.to_str().unwrap(), "--report", report.to_str().unwrap(), "-q"];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn every_shipped_scenario_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut names: Vec<PathBuf> = std::fs::read_dir(scenario("x").parent().unwrap())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    names.sort();
    assert!(names.len() >= 16);
    for p in names {
        let out = run_scenario(&p, &dir.path().join("r.json"), &["--points", "3"]);
        assert_eq!(out.status.code(), Some(0), "{}: {}{}", p.display(), stdout(&out), stderr(&out));
    }
}

#[test]
fn report_is_json_with_one_entry_per_check() {
    let dir = tempfile::tempdir().unwrap();
    let rp = dir.path().join("w.json");
    let out = run_scenario(&scenario("witten"), &rp, &[]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rp).unwrap()).unwrap();
    assert_eq!(v["scenario"], "witten");
    assert_eq!(v["passed"], true);
    assert_eq!(v["points"], 20);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "{Qbar,Q}-2H" && c["verdict"] == "pass"));
    assert!(checks.iter().all(|c| c["point"].as_array().unwrap().len() == 1));
}

#[test]
fn same_seed_same_bytes_different_seed_different_points() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a.json"), dir.path().join("b.json"), dir.path().join("c.json"));
    for (p, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
        assert!(run_scenario(&scenario("dolbeault"), p, &["--seed", seed, "--points", "6"]).status.success());
    }
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn list_models_covers_the_zoo() {
    let out = run(&["list-models"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows = text.lines().skip(1).take_while(|l| !l.trim().is_empty()).count();
    assert!(rows >= 12, "{text}");
    for m in ["witten", "gibbons_hawking", "okt_flat", "wz_modes", "gauge_sym3_resolved"] {
        assert!(text.lines().any(|l| l.starts_with(m)), "{m} missing");
    }
}

#[test]
fn show_op_prints_normal_ordered_operators() {
    let out = run(&["show-op", scenario("free_complex").to_str().unwrap(), "Q"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("p_x1") && text.contains("p_y2"), "{text}");

    let out = run(&["show-op", scenario("gauge_sym3_resolved").to_str().unwrap(), "Q"]);
    let text = stdout(&out);
    assert!(text.contains("p_alpha") && text.contains("exp((i)*alpha"), "{text}");

    let out = run(&["show-op", scenario("witten").to_str().unwrap(), "NoSuchOp"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("NoSuchOp"));
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "name = \"bad\"\nseed = 1\n\n[model]\nconstructor = \"witten\"\nW = \"x^3 - \"\n").unwrap();
    let out = run_scenario(&p, &dir.path().join("r.json"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 6"), "{}", stderr(&out));

    std::fs::write(&p, "name = \"bad\"\nseed = 1\nbogus = 3\n[model]\nconstructor = \"witten\"\n").unwrap();
    let out = run_scenario(&p, &dir.path().join("r.json"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    std::fs::write(&p, "name = \"bad\"\n\n[model]\nconstructor = \"nonesuch\"\n").unwrap();
    let out = run_scenario(&p, &dir.path().join("r.json"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4") && stderr(&out).contains("nonesuch"), "{}", stderr(&out));
}

#[test]
fn gray_zone_fails_unless_relaxed() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("gray.toml");
    // central differences agree to ~1e-9, well short of 1e-14 but far from a violation
    std::fs::write(
        &p,
        "name = \"gray\"\npoints = 4\n[model]\nconstructor = \"witten\"\nW = \"sin(x) + x^3\"\n[[checks]]\nsuite = \"fd_oracle\"\ntol = 1e-14\n",
    )
    .unwrap();
    let r = dir.path().join("r.json");
    let strict = run_scenario(&p, &r, &[]);
    assert_eq!(strict.status.code(), Some(1), "{}", stdout(&strict));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r).unwrap()).unwrap();
    assert_eq!(v["checks"][0]["verdict"], "gray");

    let relaxed = run_scenario(&p, &r, &["--fail-on-gray=false"]);
    assert_eq!(relaxed.status.code(), Some(0));
    assert!(stderr(&relaxed).contains("gray"));
}

#[test]
fn broken_supersymmetry_fails_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("broken.toml");
    // the Kähler checks on a non-Kähler coframe, expected to hold
    let text = std::fs::read_to_string(scenario("kahler_broken")).unwrap();
    let text = text.replace("expect = \"violated\"\n", "");
    std::fs::write(&p, text).unwrap();
    let out = run_scenario(&p, &dir.path().join("r.json"), &["--points", "4"]);
    assert_eq!(out.status.code(), Some(1));
}
