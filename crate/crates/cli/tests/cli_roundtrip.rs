//! CLI behavior: exit codes, diagnostics, and the solve → certify round trip.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_moreau")
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("moreau-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(bin()).args(args).output().expect("spawn");
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    (out.status.code().unwrap_or(-1), stderr)
}

fn write(path: &Path, contents: &str) -> String {
    std::fs::write(path, contents).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_ramp_writes_expected_trajectory() {
    let dir = workdir("solve");
    let cfg = write(
        &dir.join("ramp.cfg"),
        "scenario = ramp\ngrid = uniform 0.5\n",
    );
    let out = dir.join("out");
    let (code, _) = run(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert_eq!(last, "2.0,1.0");
    assert!(out.join("refinement_log.csv").exists());
}

#[test]
fn oversized_step_exits_2_with_reach_diagnostic() {
    let dir = workdir("reach");
    // one-second steps ask the state to cross the whole moving hole
    let cfg = write(
        &dir.join("hole.cfg"),
        "scenario = hole\ngrid = uniform 1.0\n",
    );
    let (code, stderr) = run(&["solve", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("out of prox reach"), "stderr: {stderr}");
}

#[test]
fn malformed_configs_exit_3() {
    let dir = workdir("badcfg");
    let missing_x0 = write(
        &dir.join("missing_x0.cfg"),
        "dimension = 1\nhorizon = 2.0\ngrid = uniform 0.5\n\n[piece]\nstart = 0\nend = 2\nset = box -1 1\nmotion = constant 0\n",
    );
    let (code, stderr) = run(&[
        "solve",
        "--config",
        &missing_x0,
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
    assert!(stderr.contains("x0"), "stderr: {stderr}");

    let unknown_key = write(&dir.join("unknown.cfg"), "scenario = ramp\nbogus = 1\n");
    let (code, _) = run(&[
        "solve",
        "--config",
        &unknown_key,
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 3);

    let (code, _) = run(&["solve", "--config", "/nonexistent.cfg"]);
    assert_eq!(code, 3);
}

#[test]
fn solve_then_certify_round_trips_on_every_builtin() {
    let dir = workdir("roundtrip");
    for name in ["ramp", "jump", "sine-play", "sine-ride", "hole", "disk"] {
        let cfg = write(
            &dir.join(format!("{name}.cfg")),
            &format!("scenario = {name}\n"),
        );
        let out = dir.join(name);
        let out_s = out.to_str().unwrap().to_string();
        let (code, stderr) = run(&["solve", "--config", &cfg, "--out", &out_s]);
        assert_eq!(code, 0, "{name} solve: {stderr}");
        let traj = out.join("trajectory.csv");
        let (code, stderr) = run(&[
            "certify",
            "--config",
            &cfg,
            "--trajectory",
            traj.to_str().unwrap(),
            "--out",
            &out_s,
        ]);
        assert_eq!(code, 0, "{name} certify: {stderr}");
        let json = std::fs::read_to_string(out.join("certificate.json")).unwrap();
        assert!(json.contains("\"verdict\": \"Solution\""), "{name}: {json}");
    }
}

#[test]
fn wrong_jump_trajectory_exits_1_with_unit_defect() {
    let dir = workdir("wrongjump");
    let cfg = write(&dir.join("jump.cfg"), "scenario = jump\n");
    let traj = write(&dir.join("wrong.csv"), "t,x1\n0.0,0.0\n1.0,3.0\n2.0,3.0\n");
    let out = dir.join("out");
    let (code, _) = run(&[
        "certify",
        "--config",
        &cfg,
        "--trajectory",
        &traj,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    let json = std::fs::read_to_string(out.join("certificate.json")).unwrap();
    assert!(json.contains("\"verdict\": \"NotSolution\""));
    assert!(json.contains("\"worst_time\": 1.0"), "{json}");
    assert!(json.contains("\"worst_m\": -1.0"), "{json}");
    assert!(json.contains("\"R\": -3.0"), "{json}");
    // residual CSV rows carry the same atom
    let csv = std::fs::read_to_string(out.join("residual.csv")).unwrap();
    assert!(
        csv.lines().any(|l| l.starts_with("1.0,3.0,1.0,-1.0,-3.0")),
        "{csv}"
    );
}

#[test]
fn infeasible_trajectory_exits_3() {
    let dir = workdir("infeasible");
    let cfg = write(&dir.join("jump.cfg"), "scenario = jump\n");
    let traj = write(&dir.join("bad.csv"), "t,x1\n0.0,0.0\n1.0,9.0\n2.0,9.0\n");
    let (code, stderr) = run(&[
        "certify",
        "--config",
        &cfg,
        "--trajectory",
        &traj,
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
    assert!(stderr.contains("infeasible"), "stderr: {stderr}");
}

#[test]
fn converge_exits_0_and_refinement_disabled_exits_4() {
    let dir = workdir("converge");
    let cfg = write(&dir.join("ramp.cfg"), "scenario = ramp\n");
    let out = dir.join("out");
    let (code, _) = run(&[
        "converge",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--levels",
        "5",
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    let defects: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert!(defects.windows(2).all(|w| w[1] < w[0]), "{defects:?}");

    // a single level cannot demonstrate decay: invariant fails
    let (code, stderr) = run(&[
        "converge",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--levels",
        "1",
    ]);
    assert_eq!(code, 4, "stderr: {stderr}");
}

#[test]
fn stability_study_runs_clean_on_sine_play() {
    let dir = workdir("stability");
    let cfg = write(&dir.join("sp.cfg"), "scenario = sine-play\n");
    let out = dir.join("out");
    let (code, _) = run(&[
        "stability",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--nmax",
        "64",
    ]);
    assert_eq!(code, 0);
    let json = std::fs::read_to_string(out.join("study.json")).unwrap();
    assert!(json.contains("\"passed\": true"), "{json}");
}

#[test]
fn study_commands_require_builtin_scenarios() {
    let dir = workdir("nonbuiltin");
    let cfg = write(
        &dir.join("pieces.cfg"),
        "dimension = 1\nhorizon = 1.0\nx0 = 0.0\n\n[piece]\nstart = 0\nend = 1\nset = box -1 1\nmotion = constant 0\n",
    );
    let (code, stderr) = run(&["converge", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(stderr.contains("built-in"), "stderr: {stderr}");
}

#[test]
fn list_scenarios_names_all_builtins() {
    let out = Command::new(bin()).arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["ramp", "jump", "sine-play", "sine-ride", "hole", "disk"] {
        assert!(text.contains(name), "missing {name}");
    }
    // hypothesis notes are part of the listing
    assert!(text.contains("hypotheses:"));
}
