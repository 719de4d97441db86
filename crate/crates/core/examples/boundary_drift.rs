//! Scalar example whose infimum sits on the boundary of the feasible set.
//! At beta = 2 the optimum k = 0 is interior; at beta = 1 the point k = 0
//! has closed-loop norm exactly beta, and gradient descent creeps toward it
//! without converging. The cost extends continuously to that point.

use mixsyn::linalg::SymMatrix;
use mixsyn::mixedcost::{closure_riccati, eval_cost_boundary};
use mixsyn::optim::{gradient_descent, CostChannel, SolveOptions};
use mixsyn::{MixedProblem, Policy};
use nalgebra::dmatrix;

fn main() -> mixsyn::Result<()> {
    let one = SymMatrix::identity(1);
    let problem = |beta: f64| {
        MixedProblem::new(
            dmatrix![-1.0],
            dmatrix![1.0],
            dmatrix![1.0],
            SymMatrix::zeros(1),
            one.clone(),
            one.clone(),
            one.clone(),
            beta,
        )
    };
    let k0 = Policy::new(dmatrix![-0.5])?;

    for beta in [2.0, 1.0] {
        let p = problem(beta)?;
        let (k, trace) = gradient_descent(&p, &k0, &SolveOptions::default(), CostChannel::Mixed)?;
        let last = trace.last().expect("at least one iterate");
        println!(
            "beta = {beta}: {:?} after {} iterations, k = {:.3e}, J = {:.3e}",
            trace.outcome,
            trace.iterations(),
            k.k[(0, 0)],
            last.j_mix
        );
        if let Some(d) = &trace.diagnostic {
            println!("  {d}");
        }
    }

    let p = problem(1.0)?;
    let zero = Policy::new(dmatrix![0.0])?;
    let sol = closure_riccati(&p, &zero)?;
    println!(
        "boundary k = 0: J = {:.3e}, X = {:.10} ({:?} solution)",
        eval_cost_boundary(&p, &zero)?,
        sol.x[(0, 0)],
        sol.kind
    );
    Ok(())
}
