//! Gradient descent from twenty random feasible gains. Every run should end
//! at the same cost, since the problem has no spurious stationary points.

use std::path::Path;

use mixsyn::cli::read_instance;
use mixsyn::optim::{multistart_global_check, CostChannel, SolveOptions};

fn main() -> mixsyn::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/instance0.json");
    let problem = read_instance(&path)?.to_problem()?;
    let opts = SolveOptions {
        max_iters: 3000,
        trace_hinf: false,
        ..SolveOptions::default()
    };
    let report = multistart_global_check(&problem, 20, 0, CostChannel::Mixed, &opts)?;
    for (i, run) in report.runs.iter().enumerate() {
        println!(
            "start {i:>2}: {:?} after {:>4} iterations, J = {:.10}",
            run.outcome, run.iterations, run.j_mix
        );
    }
    println!(
        "{} converged, relative cost spread {:.2e}, policy spread {:.2e}",
        report.converged, report.max_relative_gap, report.max_policy_gap
    );
    Ok(())
}
