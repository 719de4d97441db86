//! Lifts a converged two-channel policy into the convex parametrization and
//! back, and checks membership on both sides.

use std::path::Path;

use mixsyn::cli::read_instance;
use mixsyn::ecl::{certify_nondegenerate, default_tol, lift_solution_roundtrip, member_cvx, member_lifted, phi};
use mixsyn::optim::{feasible_base, policy_iteration_2ch, SolveOptions};

fn main() -> mixsyn::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/instance0.json");
    let problem = read_instance(&path)?.to_problem()?;
    let (k, trace) = policy_iteration_2ch(&problem, &feasible_base(&problem)?, &SolveOptions::default())?;
    println!(
        "policy iteration: {:?} after {} iterations",
        trace.outcome,
        trace.iterations()
    );

    let (ok, point) = certify_nondegenerate(&problem, &k)?;
    let tol = default_tol(&problem);
    let lifted = member_lifted(&problem, &point, tol)?;
    let cvx = member_cvx(&problem, &phi(&point), tol)?;
    println!("lifting witness found: {ok}, gamma = {:.6}", point.gamma);
    println!("lifted set: member {} (max eig {:.2e})", lifted.member, lifted.max_eig);
    println!("convex set: member {} (max eig {:.2e})", cvx.member, cvx.max_eig);

    let rt = lift_solution_roundtrip(&problem, &k)?;
    println!("round trip error {:.2e}, passed {}", rt.recovery_error, rt.passed());
    Ok(())
}
