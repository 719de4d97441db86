mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;
use mixsyn::cli::{read_instance, InstanceFile, SolveReport, SWEEP_HEADER};

fn mixsyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixsyn")).args(args).output().unwrap()
}

fn mixsyn_threads(threads: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixsyn"))
        .env("MIXSYN_THREADS", threads)
        .args(args)
        .output()
        .unwrap()
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_succeeds_with_zero_exit() {
    let o = mixsyn(&[
        "solve",
        &path("instance0_single.json"),
        "--method",
        "are",
        "--beta",
        "6",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("sqrt(J)    16.10"));
}

#[test]
fn infeasible_policy_exits_two() {
    let o = mixsyn(&["feasible", &path("example1.json"), "-k", "0,-1,-0.5,0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mixsyn(&["feasible", &path("example1.json"), "-k", "0,0,-1,0"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn pi_leaving_feasible_set_exits_two() {
    let o = mixsyn(&["solve", &path("instance0.json"), "--method", "pi", "--beta", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("LeftFeasibleSet"));
}

#[test]
fn oscillating_pi_exits_three() {
    let o = mixsyn(&["solve", &path("instance0.json"), "--method", "pi", "--beta", "14"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("Oscillating"));
}

#[test]
fn io_and_parse_errors_exit_four() {
    assert_eq!(
        mixsyn(&["betastar", "/nonexistent/instance.json"]).status.code(),
        Some(4)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"n\": 2, ").unwrap();
    let o = mixsyn(&["betastar", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("line"));
    assert_eq!(
        mixsyn(&["solve", &path("instance0.json"), "--method", "nope"])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn beta_below_beta_star_is_rejected_on_request() {
    let o = mixsyn(&[
        "solve",
        &path("instance0.json"),
        "--method",
        "pi",
        "--beta",
        "5",
        "--check-assumptions",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn singular_disturbance_covariance_names_the_assumption() {
    let mut file = read_instance(&fixture("example1.json")).unwrap();
    file.bw = vec![1.0, 0.0, 0.0, 0.0];
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("singular.json");
    std::fs::write(&p, file.to_json()).unwrap();
    let o = mixsyn(&["betastar", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Assumption 2"), "{}", stderr(&o));
}

#[test]
fn betastar_of_scalar_example() {
    let o = mixsyn(&["betastar", &path("example3.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).split_whitespace().find_map(|t| t.parse().ok()).unwrap();
    assert!((v - 0.5f64.sqrt()).abs() < 1e-5, "{v}");
}

#[test]
fn sweep_csv_is_deterministic_across_thread_counts() {
    let args = [
        "sweep",
        &path("example1.json"),
        "--d1",
        "1,0,0,0",
        "--d2",
        "0,0,0,1",
        "--t1",
        "-2:0:9",
        "--t2",
        "-2:0:9",
    ];
    let one = mixsyn_threads("1", &args);
    let four = mixsyn_threads("4", &args);
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    let text = stdout(&one);
    assert_eq!(text.lines().next(), Some(SWEEP_HEADER));
    assert_eq!(text.lines().count(), 1 + 81);
    assert_eq!(text, stdout(&four));
}

#[test]
fn json_solve_report_round_trips() {
    let o = mixsyn(&[
        "solve",
        &path("instance0.json"),
        "--method",
        "pi",
        "--beta",
        "18",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: SolveReport = serde_json::from_str(&stdout(&o)).unwrap();
    let j = report.reevaluate().unwrap();
    assert!((j - report.j_mix).abs() <= 1e-10 * report.j_mix.abs());
    assert!((report.sqrt_j - 4.80).abs() < 0.05);
}

#[test]
fn lqr_limit_through_infinite_beta() {
    let o = mixsyn(&["solve", &path("example2.json"), "--beta", "inf", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let k: Vec<f64> = serde_json::from_value(v["K"].clone()).unwrap();
    assert!((k[0] - (1.0 - 2f64.sqrt())).abs() < 1e-9);
}

fn generate(dir: &Path, n: usize, m: usize, seed: &str) -> InstanceFile {
    let p = dir.join(format!("gen{n}x{m}.json"));
    let o = mixsyn(&[
        "gen",
        &n.to_string(),
        &m.to_string(),
        "--seed",
        seed,
        "-o",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    read_instance(&p).unwrap()
}

#[test]
fn generated_instances_load() {
    let dir = tempfile::tempdir().unwrap();
    for (n, m) in [(1, 1), (15, 15)] {
        let file = generate(dir.path(), n, m, "3");
        let problem = file.to_problem().unwrap();
        assert_eq!((problem.n(), problem.m()), (n, m));
        assert!(problem.beta() > problem.beta_star().unwrap());
    }
    let a = generate(dir.path(), 4, 2, "9");
    let b = generate(dir.path(), 4, 2, "9");
    assert_eq!(a, b);
}

#[test]
fn verify_is_deterministic_and_detects_a_corrupted_gradient() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 3, 2, "5");
    let p = dir.path().join("gen3x2.json");
    let p = p.to_str().unwrap();
    let first = mixsyn_threads("1", &["verify", p, "--seed", "4"]);
    let second = mixsyn_threads("3", &["verify", p, "--seed", "4"]);
    assert_eq!(first.status.code(), Some(0), "{}", stdout(&first));
    assert_eq!(stdout(&first), stdout(&second));
    let bad = mixsyn(&["verify", p, "--corrupt-gradient"]);
    assert_ne!(bad.status.code(), Some(0));
    assert!(stdout(&bad).contains("gradient-fd        FAIL"), "{}", stdout(&bad));
}

#[test]
fn hinf_norm_command_matches_closed_form() {
    // A = -I, B = Bw = I, K = -I: T(s) = [I; -I] / (s + 2), peak √2 / 2.
    let o = mixsyn(&["hinf-norm", &path("example1.json"), "-k", "-1,0,0,-1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.5f64.sqrt()).abs() < 1e-6);
}
