//! H∞ norm by bisection on the bounded real lemma, feasibility
//! certification for `K_β`, and the optimal robustness level β*.

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, ensure_square, is_hurwitz, Matrix};
use crate::problem::{MixedProblem, Policy};
use crate::riccati::{has_axis_eigenvalues, solve_care_dual, solve_care_primal, RiccatiKind, RiccatiSolution};

/// Default relative tolerance of [`hinf_norm`].
pub const DEFAULT_TOL: f64 = 1e-6;

/// Relative gap `β - ‖T∞‖ < MARGINAL_REL · β` flags a feasible policy as
/// marginal.
pub const MARGINAL_REL: f64 = 1e-6;

/// State-space realization `G(s) = C (sI - A)⁻¹ B`.
#[derive(Debug, Clone)]
pub struct Ssm {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

impl Ssm {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        let n = ensure_square(&a)?;
        if b.nrows() != n || c.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "A is {n}x{n}, B has {} rows, C has {} columns",
                b.nrows(),
                c.ncols()
            )));
        }
        Ok(Self { a, b, c })
    }

    /// BRL Hamiltonian `[[A, γ⁻² B Bᵀ], [-Cᵀ C, -Aᵀ]]`.
    fn hamiltonian(&self, gamma: f64) -> Matrix {
        let n = self.a.nrows();
        let mut h = Matrix::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).copy_from(&self.a);
        h.view_mut((0, n), (n, n))
            .copy_from(&(&self.b * self.b.transpose() / (gamma * gamma)));
        h.view_mut((n, 0), (n, n)).copy_from(&(-(self.c.transpose() * &self.c)));
        h.view_mut((n, n), (n, n)).copy_from(&(-self.a.transpose()));
        h
    }

    /// For Hurwitz `A`: `true` iff `‖G‖∞ < γ` (no Hamiltonian eigenvalue on
    /// the imaginary axis).
    pub fn norm_below(&self, gamma: f64) -> Result<bool> {
        Ok(!has_axis_eigenvalues(&eigenvalues(&self.hamiltonian(gamma))?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    H2,
    Hinf,
}

/// Closed-loop map from `w` to the selected performance output,
/// `[Q^{1/2}; R^{1/2} K] (sI - A - BK)⁻¹ B_w`.
pub fn close_loop_channel(problem: &MixedProblem, policy: &Policy, channel: Channel) -> Result<Ssm> {
    problem.check_policy(policy)?;
    let (q_sqrt, r_sqrt) = match channel {
        Channel::H2 => (problem.q2_sqrt(), problem.r2_sqrt()),
        Channel::Hinf => (problem.qinf_sqrt(), problem.rinf_sqrt()),
    };
    let n = problem.n();
    let m = problem.m();
    let mut c = Matrix::zeros(n + m, n);
    c.view_mut((0, 0), (n, n)).copy_from(q_sqrt.as_matrix());
    c.view_mut((n, 0), (m, n)).copy_from(&(r_sqrt.as_matrix() * &policy.k));
    Ssm::new(problem.closed_loop(policy), problem.bw().clone(), c)
}

/// H∞ norm of a stable system, to `|β̂ - ‖G‖| <= tol (1 + β̂)`.
pub fn hinf_norm(sys: &Ssm, tol: f64) -> Result<f64> {
    if !is_hurwitz(&sys.a, 0.0)? {
        return Err(Error::Unstable);
    }
    if sys.b.amax() == 0.0 || sys.c.amax() == 0.0 {
        return Ok(0.0);
    }
    // DC gain σ_max(C A⁻¹ B) is a lower bound.
    let a_inv_b = sys.a.clone().lu().solve(&sys.b).ok_or(Error::Unstable)?;
    let dc = &sys.c * a_inv_b;
    let mut lo = SVD::new(dc, false, false).singular_values.max();
    let mut hi = if lo > 0.0 { 2.0 * lo } else { 1e-6 };
    let mut doublings = 0;
    while !sys.norm_below(hi)? {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Unstable);
        }
    }
    while hi - lo > tol * (1.0 + lo) {
        let mid = 0.5 * (lo + hi);
        if sys.norm_below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-loop H∞ norm `‖T∞(K)‖`, `+∞` for non-stabilizing `K`.
pub fn policy_hinf_norm(problem: &MixedProblem, policy: &Policy, tol: f64) -> Result<f64> {
    let sys = close_loop_channel(problem, policy, Channel::Hinf)?;
    match hinf_norm(&sys, tol) {
        Err(Error::Unstable) => Ok(f64::INFINITY),
        other => other,
    }
}

/// Outcome of a `K ∈ K_β` test.
#[derive(Debug, Clone)]
pub struct Feasibility {
    pub stable: bool,
    pub feasible: bool,
    /// Feasible with `β - ‖T∞(K)‖ < 1e-6 β`.
    pub marginal: bool,
    /// Stabilizing solution of `A_K X + X A_Kᵀ + β⁻² X S_K X + W = 0` when
    /// feasible.
    pub certificate: Option<RiccatiSolution>,
}

impl Feasibility {
    fn infeasible(stable: bool) -> Self {
        Self {
            stable,
            feasible: false,
            marginal: false,
            certificate: None,
        }
    }

    /// Feasible and not marginal.
    pub fn interior(&self) -> bool {
        self.feasible && !self.marginal
    }
}

/// `K ∈ K_β` iff `A + BK` is Hurwitz and the BRL Riccati equation has a
/// stabilizing solution.
pub fn is_feasible(problem: &MixedProblem, policy: &Policy) -> Result<Feasibility> {
    problem.check_policy(policy)?;
    let a_k = problem.closed_loop(policy);
    if !is_hurwitz(&a_k, 0.0)? {
        return Ok(Feasibility::infeasible(false));
    }
    let beta = problem.beta();
    let d = problem.s_k(policy) / (beta * beta);
    let cert = match solve_care_primal(&a_k, &d, problem.w(), RiccatiKind::Stabilizing) {
        Ok(sol) => sol,
        Err(Error::NoStabilizingSolution(_)) => return Ok(Feasibility::infeasible(true)),
        Err(e) => return Err(e),
    };
    let sys = close_loop_channel(problem, policy, Channel::Hinf)?;
    let marginal = !sys.norm_below(beta * (1.0 - MARGINAL_REL))?;
    Ok(Feasibility {
        stable: true,
        feasible: true,
        marginal,
        certificate: Some(cert),
    })
}

/// `true` when the game Riccati equation
/// `Aᵀ P + P A + P (γ⁻² W - B R∞⁻¹ Bᵀ) P + Q∞ = 0` has a stabilizing
/// solution `P ⪰ 0`, i.e. some stabilizing `K` achieves `‖T∞(K)‖ < γ`.
pub fn level_achievable(problem: &MixedProblem, gamma: f64) -> Result<bool> {
    let d = problem.w().as_matrix() / (gamma * gamma) - problem.b() * problem.rinf_inv() * problem.b().transpose();
    match solve_care_dual(problem.a(), &d, problem.qinf(), RiccatiKind::Stabilizing) {
        Ok(sol) => {
            let scale = 1.0 + sol.x.amax();
            Ok(sol.x.min_eigenvalue() >= -1e-9 * scale)
        }
        Err(Error::NoStabilizingSolution(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// β* by bisection on [`level_achievable`], to `tol (1 + β̂*)`.
pub fn beta_star(problem: &MixedProblem, tol: f64) -> Result<f64> {
    let lqr = crate::optim::solve_lqr(problem.a(), problem.b(), problem.qinf(), problem.rinf(), problem.w())
        .map_err(|_| Error::NonStabilizable)?;
    let mut hi = policy_hinf_norm(problem, &lqr.policy, 1e-6)?.max(1e-12) * 1.01;
    let mut guard = 0;
    while !level_achievable(problem, hi)? {
        hi *= 2.0;
        guard += 1;
        if guard > 100 {
            return Err(Error::NonStabilizable);
        }
    }
    let mut lo = 0.0;
    while hi - lo > tol * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        if level_achievable(problem, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn example3_sys(k: f64) -> Ssm {
        Ssm::new(dmatrix![-1.0 + k], dmatrix![1.0], dmatrix![1.0; k]).unwrap()
    }

    fn closed_form(k: f64) -> f64 {
        (1.0 + k * k).sqrt() / (1.0 - k)
    }

    #[test]
    fn scalar_norms_match_closed_form() {
        for k in [0.0, -1.0, -0.5, 0.5, -3.0] {
            let v = hinf_norm(&example3_sys(k), 1e-9).unwrap();
            assert!((v - closed_form(k)).abs() < 1e-8 * (1.0 + v), "k={k}: {v}");
        }
    }

    #[test]
    fn unstable_system_rejected() {
        assert_eq!(hinf_norm(&example3_sys(1.5), 1e-6), Err(Error::Unstable));
    }

    #[test]
    fn zero_output_has_zero_norm() {
        let sys = Ssm::new(dmatrix![-1.0], dmatrix![1.0], dmatrix![0.0]).unwrap();
        assert_eq!(hinf_norm(&sys, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn norm_blows_up_near_instability() {
        let vals: Vec<f64> = [0.9, 0.99, 0.999]
            .iter()
            .map(|&k| hinf_norm(&example3_sys(k), 1e-8).unwrap())
            .collect();
        assert!(vals[0] < vals[1] && vals[1] < vals[2]);
        assert!(vals[2] > 500.0);
    }

    #[test]
    fn ssm_dimension_check() {
        assert!(Ssm::new(dmatrix![-1.0], dmatrix![1.0; 1.0], dmatrix![1.0]).is_err());
    }
}
