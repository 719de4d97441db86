//! Optimal robustness level of the bundled instances, cross-checked against
//! the H∞ norm of the central controller just above it.

use std::path::Path;

use mixsyn::cli::read_instance;
use mixsyn::hinf::{beta_star, policy_hinf_norm};
use mixsyn::optim::central_gain;

fn main() -> mixsyn::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for name in ["instance0.json", "example1.json", "example3.json"] {
        let problem = read_instance(&fixtures.join(name))?.to_problem()?;
        let bs = beta_star(&problem, 1e-8)?;
        let above = problem.with_beta(bs * 1.05)?;
        let k = central_gain(&above)?;
        let norm = policy_hinf_norm(&above, &k, 1e-9)?;
        println!("{name:<16} beta* = {bs:.6}   central gain at 1.05 beta*: Hinf = {norm:.6}");
    }
    Ok(())
}
