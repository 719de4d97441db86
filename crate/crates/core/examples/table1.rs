//! Reproduces the low-dimensional comparison on the bundled 3x3 instance:
//! analytic Riccati solution and policy iteration in the single-channel
//! case, policy iteration and gradient descent in the two-channel case.

use std::path::Path;
use std::time::Instant;

use mixsyn::cli::read_instance;
use mixsyn::hinf::policy_hinf_norm;
use mixsyn::mixedcost::{eval_cost_1ch, eval_cost_2ch, h2_norm};
use mixsyn::optim::{
    feasible_base, gradient_descent, policy_iteration_1ch, policy_iteration_2ch, solve_analytic_1ch, CostChannel,
    SolveOptions,
};
use mixsyn::{MixedProblem, Policy};

fn row(label: &str, problem: &MixedProblem, k: &Policy, j: f64, secs: f64, note: &str) {
    let h2 = h2_norm(problem, k).unwrap();
    let hinf = policy_hinf_norm(problem, k, 1e-9).unwrap();
    println!(
        "{label:<8} beta={:<4} time={secs:>7.4}s  sqrt(J)={:>8.4}  H2={h2:>8.4}  Hinf={hinf:>8.4}  {note}",
        problem.beta(),
        j.sqrt()
    );
}

fn main() -> mixsyn::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let two = read_instance(&fixtures.join("instance0.json"))?.to_problem()?;
    let one = two.to_single_channel();
    let opts = SolveOptions::default();

    println!("single channel (Q = R = I)");
    for beta in [6.0, 14.0, 18.0] {
        let p = one.with_beta(beta)?;
        let t = Instant::now();
        let (k, _) = solve_analytic_1ch(&p)?;
        let secs = t.elapsed().as_secs_f64();
        row("ARE", &p, &k, eval_cost_1ch(&p, &k)?.0, secs, "");
        let t = Instant::now();
        let (k_pi, trace) = policy_iteration_1ch(&p, &feasible_base(&p)?, &opts)?;
        let secs = t.elapsed().as_secs_f64();
        let note = format!(
            "{:?} in {} iterations, |K_PI - K_ARE| = {:.1e}",
            trace.outcome,
            trace.iterations(),
            (&k_pi.k - &k.k).norm()
        );
        row("PI", &p, &k_pi, eval_cost_1ch(&p, &k_pi)?.0, secs, &note);
    }

    println!("\ntwo channel");
    for beta in [6.0, 14.0, 18.0] {
        let p = two.with_beta(beta)?;
        let k0 = feasible_base(&p)?;
        let t = Instant::now();
        let (k_pi, trace) = policy_iteration_2ch(&p, &k0, &opts)?;
        let secs = t.elapsed().as_secs_f64();
        let note = format!("{:?} after {} iterations", trace.outcome, trace.iterations());
        row("PI", &p, &k_pi, eval_cost_2ch(&p, &k_pi)?.0, secs, &note);
        let gd_opts = SolveOptions {
            max_iters: 5000,
            ..SolveOptions::default()
        };
        let t = Instant::now();
        let (k_gd, trace) = gradient_descent(&p, &k0, &gd_opts, CostChannel::Mixed)?;
        let secs = t.elapsed().as_secs_f64();
        let note = format!("{:?} after {} iterations", trace.outcome, trace.iterations());
        row("GD", &p, &k_gd, eval_cost_2ch(&p, &k_gd)?.0, secs, &note);
    }
    Ok(())
}
