//! Continuous algebraic Riccati equations in the two sign conventions used by
//! the mixed design:
//!
//! * primal: `M X + X Mᵀ + X D X + C = 0`, closed loop `M + X D`
//! * dual:   `Mᵀ P + P M + P D P + C = 0`, closed loop `M + D P`
//!
//! `D` may be indefinite for stabilizing solves (game and LQR forms). The
//! minimal solution is only meaningful for `D ⪰ 0`, `C ⪰ 0`.

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};
use crate::linalg::{
    complex_schur, ensure_same_dim, ensure_square, reorder_schur, spectral_abscissa, LyapunovSolver, Matrix, SymMatrix,
    C64,
};

/// Eigenvalues with `|Re λ| <= AXIS_TOL * spectral radius` count as lying on
/// the imaginary axis.
pub const AXIS_TOL: f64 = 1e-8;

/// Stabilizing/minimal separation threshold on the closed-loop abscissa.
pub const BOUNDARY_TAU: f64 = 1e-7;

const GRAPH_RCOND_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiccatiKind {
    Stabilizing,
    Minimal,
}

#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub x: SymMatrix,
    pub residual_norm: f64,
    pub closed_loop_abscissa: f64,
    pub kind: RiccatiKind,
    /// Set when `|closed_loop_abscissa| < 10 τ`: the solution sits at or
    /// next to the stabilizing/minimal transition.
    pub near_boundary: bool,
}

impl RiccatiSolution {
    fn build(x: SymMatrix, m: &Matrix, d: &Matrix, c: &Matrix, kind: RiccatiKind) -> Result<Self> {
        let residual_norm = care_residual(m, d, c, &x)?;
        let closed_loop_abscissa = spectral_abscissa(&(m + x.as_matrix() * d))?;
        Ok(Self {
            x,
            residual_norm,
            closed_loop_abscissa,
            kind,
            near_boundary: closed_loop_abscissa.abs() < 10.0 * BOUNDARY_TAU,
        })
    }
}

fn check_dims(m: &Matrix, d: &Matrix, c: &Matrix) -> Result<usize> {
    let n = ensure_square(m)?;
    ensure_same_dim(m, d, "Riccati quadratic term")?;
    ensure_same_dim(m, c, "Riccati constant term")?;
    Ok(n)
}

/// Frobenius norm of `M X + X Mᵀ + X D X + C`.
pub fn care_residual(m: &Matrix, d: &Matrix, c: &Matrix, x: &Matrix) -> Result<f64> {
    check_dims(m, d, c)?;
    ensure_same_dim(m, x, "Riccati solution")?;
    Ok((m * x + x * m.transpose() + x * d * x + c).norm())
}

/// Frobenius norm of `Mᵀ P + P M + P D P + C`.
pub fn care_residual_dual(m: &Matrix, d: &Matrix, c: &Matrix, p: &Matrix) -> Result<f64> {
    care_residual(&m.transpose(), d, c, p)
}

/// Solves `M X + X Mᵀ + X D X + C = 0`.
///
/// `Stabilizing` requires `M + X D` Hurwitz and fails with
/// [`Error::NoStabilizingSolution`] when the Hamiltonian has eigenvalues on
/// the imaginary axis. `Minimal` returns the stabilizing solution when one
/// exists and otherwise the minimal solution, whose closed loop has its
/// spectrum in the closed left half-plane.
pub fn solve_care_primal(m: &Matrix, d: &Matrix, c: &Matrix, want: RiccatiKind) -> Result<RiccatiSolution> {
    let n = check_dims(m, d, c)?;
    if n == 1 {
        return solve_scalar(m[(0, 0)], d[(0, 0)], c[(0, 0)], want)
            .and_then(|x| RiccatiSolution::build(x, m, d, c, want));
    }
    if d.amax() == 0.0 {
        return match LyapunovSolver::new(m) {
            Ok(solver) => RiccatiSolution::build(solver.solve(c)?, m, d, c, want),
            Err(Error::UnstableCoefficient) => Err(Error::NoStabilizingSolution("D = 0 and M is not Hurwitz".into())),
            Err(e) => Err(e),
        };
    }
    match want {
        RiccatiKind::Stabilizing => {
            let x = hamiltonian_solution(m, d, c, Selection::Stable)?;
            let x = newton_polish(m, d, c, x);
            let sol = RiccatiSolution::build(x, m, d, c, want)?;
            if !(sol.closed_loop_abscissa < 0.0) {
                return Err(Error::NoStabilizingSolution(format!(
                    "closed-loop abscissa {:.3e} is not negative",
                    sol.closed_loop_abscissa
                )));
            }
            Ok(sol)
        }
        RiccatiKind::Minimal => {
            if let Ok(sol) = solve_care_primal(m, d, c, RiccatiKind::Stabilizing) {
                if sol.closed_loop_abscissa < -BOUNDARY_TAU {
                    return Ok(RiccatiSolution {
                        kind: RiccatiKind::Minimal,
                        ..sol
                    });
                }
            }
            // Newton-Kleinman from the Lyapunov solution increases
            // monotonically to the minimal solution, also on the boundary
            // where no stabilizing solution exists.
            match solve_care_newton(m, d, c, 200) {
                Ok(sol) => Ok(RiccatiSolution {
                    kind: RiccatiKind::Minimal,
                    ..sol
                }),
                Err(Error::UnstableCoefficient) => {
                    let x = hamiltonian_solution(m, d, c, Selection::SmallestReal)?;
                    RiccatiSolution::build(x, m, d, c, RiccatiKind::Minimal)
                }
                Err(e) => Err(e),
            }
        }
    }
}

/// Solves `Mᵀ P + P M + P D P + C = 0`; closed loop `M + D P`.
pub fn solve_care_dual(m: &Matrix, d: &Matrix, c: &Matrix, want: RiccatiKind) -> Result<RiccatiSolution> {
    solve_care_primal(&m.transpose(), d, c, want)
}

/// Newton-Kleinman iteration for the primal equation, started from the
/// Lyapunov solution `M X₀ + X₀ Mᵀ + C = 0`. Requires `M` Hurwitz.
///
/// Converges quadratically to the stabilizing solution in the interior and
/// linearly to the minimal solution on the boundary; stops when the update
/// stalls.
pub fn solve_care_newton(m: &Matrix, d: &Matrix, c: &Matrix, max_iter: usize) -> Result<RiccatiSolution> {
    check_dims(m, d, c)?;
    let mut x = LyapunovSolver::new(m)?.solve(c)?.into_inner();
    let mut best = x.clone();
    let mut best_res = care_residual(m, d, c, &x)?;
    let mut prev_step = f64::INFINITY;
    for it in 0..max_iter {
        let mk = m + &x * d;
        let solver = match LyapunovSolver::new(&mk) {
            Ok(s) => s,
            Err(_) => break,
        };
        let rhs = c - &x * d * &x;
        let next = match solver.solve(&rhs) {
            Ok(v) => v.into_inner(),
            Err(_) => break,
        };
        let step = (&next - &x).norm();
        x = next;
        let res = care_residual(m, d, c, &x)?;
        if res <= best_res {
            best_res = res;
            best = x.clone();
        }
        if step <= 1e-15 * (1.0 + x.norm()) {
            break;
        }
        if it > 8 && step >= prev_step {
            break;
        }
        prev_step = step;
    }
    let sol = RiccatiSolution::build(SymMatrix::symmetrize(best), m, d, c, RiccatiKind::Minimal)?;
    let kind = if sol.closed_loop_abscissa < 0.0 && !sol.near_boundary {
        RiccatiKind::Stabilizing
    } else {
        RiccatiKind::Minimal
    };
    Ok(RiccatiSolution { kind, ..sol })
}

#[derive(Debug, Clone, Copy)]
enum Selection {
    Stable,
    SmallestReal,
}

/// `[[Mᵀ, D], [-C, -M]]`.
fn hamiltonian(m: &Matrix, d: &Matrix, c: &Matrix) -> Matrix {
    let n = m.nrows();
    let mut h = Matrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&m.transpose());
    h.view_mut((0, n), (n, n)).copy_from(d);
    h.view_mut((n, 0), (n, n)).copy_from(&(-c));
    h.view_mut((n, n), (n, n)).copy_from(&(-m));
    h
}

/// `true` when some eigenvalue lies within `AXIS_TOL * ρ` of the imaginary
/// axis, `ρ` the spectral radius.
pub fn has_axis_eigenvalues(eigs: &[C64]) -> bool {
    let rho = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = AXIS_TOL * rho;
    eigs.iter().any(|z| z.re.abs() <= tol)
}

fn hamiltonian_solution(m: &Matrix, d: &Matrix, c: &Matrix, sel: Selection) -> Result<SymMatrix> {
    let n = m.nrows();
    let h = hamiltonian(m, d, c);
    let (mut q, mut t) = complex_schur(&h)?;
    let diag: Vec<C64> = t.diagonal().iter().copied().collect();
    let flags: Vec<bool> = match sel {
        Selection::Stable => {
            if has_axis_eigenvalues(&diag) {
                return Err(Error::NoStabilizingSolution(
                    "Hamiltonian has eigenvalues on the imaginary axis".into(),
                ));
            }
            diag.iter().map(|z| z.re < 0.0).collect()
        }
        Selection::SmallestReal => {
            let mut idx: Vec<usize> = (0..2 * n).collect();
            idx.sort_by(|&a, &b| diag[a].re.total_cmp(&diag[b].re));
            let mut flags = vec![false; 2 * n];
            for &i in idx.iter().take(n) {
                flags[i] = true;
            }
            flags
        }
    };
    let k = reorder_schur(&mut q, &mut t, &flags);
    if k != n {
        return Err(Error::NoStabilizingSolution(format!(
            "stable invariant subspace has dimension {k}, expected {n}"
        )));
    }
    let u1 = q.view((0, 0), (n, n)).clone_owned();
    let u2 = q.view((n, 0), (n, n)).clone_owned();
    let sv = SVD::new(u1.clone(), false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin / smax < GRAPH_RCOND_MIN {
        return Err(Error::NoStabilizingSolution(
            "invariant subspace is not the graph of a matrix".into(),
        ));
    }
    // X = U2 U1⁻¹  <=>  U1ᵀ Xᵀ = U2ᵀ
    let xt = u1
        .transpose()
        .lu()
        .solve(&u2.transpose())
        .ok_or_else(|| Error::NoStabilizingSolution("singular U1 block".into()))?;
    let x: DMatrix<f64> = xt.transpose().map(|z| z.re);
    Ok(SymMatrix::symmetrize(x))
}

/// Up to two Newton corrections on a stabilizing candidate; keeps the
/// candidate if a correction does not lower the residual.
fn newton_polish(m: &Matrix, d: &Matrix, c: &Matrix, x: SymMatrix) -> SymMatrix {
    let mut best = x;
    let mut best_res = care_residual(m, d, c, &best).unwrap_or(f64::INFINITY);
    let bound = 1e-12 * (1.0 + c.norm());
    for _ in 0..2 {
        if best_res <= bound {
            break;
        }
        let mk = m + best.as_matrix() * d;
        let Ok(solver) = LyapunovSolver::new(&mk) else {
            break;
        };
        let rhs = c - best.as_matrix() * d * best.as_matrix();
        let Ok(next) = solver.solve(&rhs) else {
            break;
        };
        let res = care_residual(m, d, c, &next).unwrap_or(f64::INFINITY);
        if res < best_res {
            best = next;
            best_res = res;
        } else {
            break;
        }
    }
    best
}

/// `d x² + 2 m x + c = 0`; the stabilizing root makes `m + d x = -√disc`.
fn solve_scalar(m: f64, d: f64, c: f64, want: RiccatiKind) -> Result<SymMatrix> {
    let one = |v: f64| SymMatrix::symmetrize(DMatrix::from_element(1, 1, v));
    if d == 0.0 {
        if m < 0.0 {
            return Ok(one(-c / (2.0 * m)));
        }
        return Err(Error::NoStabilizingSolution("D = 0 and M is not Hurwitz".into()));
    }
    let mut disc = m * m - d * c;
    let scale = m * m + (d * c).abs();
    if disc <= 0.0 {
        let on_boundary = disc >= -1e-12 * scale;
        if want == RiccatiKind::Stabilizing || !on_boundary {
            return Err(Error::NoStabilizingSolution(if on_boundary {
                "Hamiltonian has eigenvalues on the imaginary axis".into()
            } else {
                "no real solution".into()
            }));
        }
        disc = 0.0;
    }
    let s = disc.sqrt();
    // roots (-m ∓ s)/d; product c/d. Pick the cancellation-free expression.
    let denom = s - m;
    let x = if denom.abs() > 0.0 && m <= 0.0 {
        c / denom
    } else {
        (-m - s) / d
    };
    Ok(one(x))
}
