#![allow(dead_code)]

use std::path::PathBuf;

use mixsyn::cli::read_instance;
use mixsyn::linalg::{Matrix, SymMatrix};
use mixsyn::MixedProblem;
use nalgebra::dmatrix;
use serde_json::Value;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load(name: &str) -> MixedProblem {
    read_instance(&fixture(name)).unwrap().to_problem().unwrap()
}

pub fn expected() -> Value {
    let text = std::fs::read_to_string(fixture("expected.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

pub fn instance0() -> MixedProblem {
    load("instance0.json")
}

pub fn instance0_single(beta: f64) -> MixedProblem {
    load("instance0_single.json").with_beta(beta).unwrap()
}

/// Scalar plant `A = -1`, `B = B_w = 1`, `Q₂ = 0`, `Q∞ = R₂ = R∞ = 1`.
pub fn example3(beta: f64) -> MixedProblem {
    let one = SymMatrix::identity(1);
    MixedProblem::new(
        dmatrix![-1.0],
        dmatrix![1.0],
        dmatrix![1.0],
        SymMatrix::zeros(1),
        one.clone(),
        one.clone(),
        one,
        beta,
    )
    .unwrap()
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Random `n x m` matrix with standard normal entries from a seeded stream.
pub fn randn(rng: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    use rand::Rng;
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal))
}
