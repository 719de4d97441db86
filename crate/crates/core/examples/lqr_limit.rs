//! As beta grows the mixed optimum approaches the LQR gain. Uses the 2x2
//! example, whose LQR gain is (1 - √2) I.

use std::path::Path;

use mixsyn::cli::read_instance;
use mixsyn::optim::{feasible_base, policy_iteration_2ch, solve_lqr, SolveOptions};

fn main() -> mixsyn::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/example1.json");
    let base = read_instance(&path)?.to_problem()?;
    let lqr = solve_lqr(base.a(), base.b(), base.q2(), base.r2(), base.w())?;
    println!("LQR gain diagonal {:.8}", lqr.policy.k[(0, 0)]);
    for beta in [1.0, 3.5, 10.0, 100.0, 1e4, 1e9] {
        let p = base.with_beta(beta)?;
        let (k, trace) = policy_iteration_2ch(&p, &feasible_base(&p)?, &SolveOptions::default())?;
        println!(
            "beta = {beta:>8}: K diagonal {:.8}, |K - K_lqr| = {:.2e} ({:?})",
            k.k[(0, 0)],
            (&k.k - &lqr.policy.k).norm(),
            trace.outcome
        );
    }
    Ok(())
}
