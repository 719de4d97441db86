//! Compares the analytic gradients with central finite differences at a
//! few random feasible policies.

use std::path::Path;

use mixsyn::cli::read_instance;
use mixsyn::mixedcost::{fd_gradient, grad_1ch, grad_2ch};
use mixsyn::optim::sample_feasible_starts;

fn main() -> mixsyn::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/instance0.json");
    let two = read_instance(&path)?.to_problem()?;
    let one = two.to_single_channel();
    for (label, problem) in [("two channel", &two), ("single channel", &one)] {
        println!("{label}");
        for k in sample_feasible_starts(problem, 4, 3)? {
            let fd = fd_gradient(problem, &k, 1e-6 * (1.0 + k.norm()))?;
            let g = grad_2ch(problem, &k)?;
            let mut line = format!(
                "  |K| = {:>7.3}  FD error {:.2e}",
                k.norm(),
                (&g - &fd).norm() / fd.norm()
            );
            if problem.is_single_channel() {
                let g1 = grad_1ch(problem, &k)?;
                line += &format!("  formula gap {:.2e}", (&g1 - &g).norm() / g.norm());
            }
            println!("{line}");
        }
    }
    Ok(())
}
