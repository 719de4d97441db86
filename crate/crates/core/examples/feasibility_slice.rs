//! Two-dimensional slice through the feasible set of the 2x2 example. The
//! segment between two feasible gains leaves the set, so the set is not
//! convex. Prints the CSV that `mixsyn sweep` writes.

use std::path::Path;

use mixsyn::cli::{read_instance, sweep_csv, sweep_rows, ChannelArg, SweepSpec};
use mixsyn::linalg::Matrix;

fn main() -> mixsyn::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/example1.json");
    let problem = read_instance(&path)?.to_problem()?;
    let k1 = Matrix::from_row_slice(2, 2, &[0.0, 0.0, -1.0, 0.0]);
    let k2 = Matrix::from_row_slice(2, 2, &[0.0, -2.0, 0.0, 0.0]);
    // K(t1, t2) = K1 + t1 (K2 - K1) + t2 D, t1 = 0.5 is the midpoint.
    let spec = SweepSpec {
        base: k1.clone(),
        d1: &k2 - &k1,
        d2: Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]),
        t1: (0.0, 1.0, 11),
        t2: (0.0, 0.5, 3),
        channel: ChannelArg::Two,
        lqr: false,
    };
    print!("{}", sweep_csv(&sweep_rows(&problem, &spec)?));
    Ok(())
}
