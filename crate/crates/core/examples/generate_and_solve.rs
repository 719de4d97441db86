//! Generates a random instance and solves it with every method.

use std::time::Instant;

use mixsyn::cli::generate_instance;
use mixsyn::mixedcost::{eval_cost_1ch, eval_cost_2ch};
use mixsyn::optim::{
    feasible_base, gradient_descent, policy_iteration_1ch, policy_iteration_2ch, sample_feasible_starts,
    solve_analytic_1ch, CostChannel, SolveOptions,
};

fn main() -> mixsyn::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let two = generate_instance(n, n.div_ceil(2), 1)?.to_problem()?;
    let one = two.to_single_channel();
    println!(
        "n = {n}, m = {}, beta = {:.4}, beta* = {:.4}",
        two.m(),
        two.beta(),
        two.beta_star()?
    );
    let opts = SolveOptions::default();

    let t = Instant::now();
    let (k, _) = solve_analytic_1ch(&one)?;
    println!(
        "1-ch ARE  J = {:.6}  ({:.3}s)",
        eval_cost_1ch(&one, &k)?.0,
        t.elapsed().as_secs_f64()
    );

    let t = Instant::now();
    let k0 = sample_feasible_starts(&one, 1, 0)?.remove(0);
    let (k, trace) = policy_iteration_1ch(&one, &k0, &opts)?;
    println!(
        "1-ch PI   J = {:.6}  {:?} in {} ({:.3}s)",
        eval_cost_1ch(&one, &k)?.0,
        trace.outcome,
        trace.iterations(),
        t.elapsed().as_secs_f64()
    );

    let k0 = feasible_base(&two)?;
    let t = Instant::now();
    let (k, trace) = policy_iteration_2ch(&two, &k0, &opts)?;
    println!(
        "2-ch PI   J = {:.6}  {:?} in {} ({:.3}s)",
        eval_cost_2ch(&two, &k)?.0,
        trace.outcome,
        trace.iterations(),
        t.elapsed().as_secs_f64()
    );

    let t = Instant::now();
    let gd = SolveOptions {
        max_iters: 3000,
        ..opts
    };
    let (k, trace) = gradient_descent(&two, &k0, &gd, CostChannel::Mixed)?;
    println!(
        "2-ch GD   J = {:.6}  {:?} in {} ({:.3}s)",
        eval_cost_2ch(&two, &k)?.0,
        trace.outcome,
        trace.iterations(),
        t.elapsed().as_secs_f64()
    );
    Ok(())
}
