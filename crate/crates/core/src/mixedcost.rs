//! Mixed cost evaluation, H2 norm, exact policy gradients and the
//! finite-difference oracle.
//!
//! Two-channel cost: `J(K) = tr((Q₂ + Kᵀ R₂ K) X_K)` with `X_K` the
//! stabilizing solution of `A_K X + X A_Kᵀ + β⁻² X S_K X + W = 0`.
//! Single-channel cost: `J(K) = tr(P_K W)` with
//! `A_Kᵀ P + P A_K + β⁻² P W P + S_K = 0`.

use crate::error::{Error, Result};
use crate::hinf::{is_feasible, policy_hinf_norm, MARGINAL_REL};
use crate::linalg::{is_hurwitz, solve_lyapunov, solve_lyapunov_transposed, Matrix, SymMatrix};
use crate::problem::{MixedProblem, Policy};
use crate::riccati::{care_residual, solve_care_dual, solve_care_primal, RiccatiKind, RiccatiSolution, BOUNDARY_TAU};

/// Per-policy summary: cost, gradient, norms and feasibility verdict.
#[derive(Debug, Clone)]
pub struct CostReport {
    /// `NaN` outside the closure of `K_β`.
    pub j_mix: f64,
    /// Absent on marginal or infeasible policies.
    pub grad: Option<Matrix>,
    pub grad_norm: f64,
    pub h2_norm: f64,
    pub hinf_norm: f64,
    pub feasible: bool,
    pub marginal: bool,
    pub x_k: Option<SymMatrix>,
}

fn infeasible(e: Error) -> Error {
    match e {
        Error::NoStabilizingSolution(_) | Error::UnstableCoefficient | Error::Unstable => Error::InfeasiblePolicy,
        other => other,
    }
}

/// Riccati solution behind the two-channel cost. Switches to the minimal
/// solution when the stabilizing one sits within `τ` of the boundary.
fn cost_riccati(problem: &MixedProblem, policy: &Policy) -> Result<RiccatiSolution> {
    problem.check_policy(policy)?;
    let a_k = problem.closed_loop(policy);
    if !is_hurwitz(&a_k, 0.0)? {
        return Err(Error::InfeasiblePolicy);
    }
    let beta = problem.beta();
    let d = problem.s_k(policy) / (beta * beta);
    let sol = solve_care_primal(&a_k, &d, problem.w(), RiccatiKind::Stabilizing).map_err(infeasible)?;
    if sol.closed_loop_abscissa > -BOUNDARY_TAU {
        return solve_care_primal(&a_k, &d, problem.w(), RiccatiKind::Minimal);
    }
    Ok(sol)
}

/// Two-channel mixed cost and the Riccati solution `X_K`.
pub fn eval_cost_2ch(problem: &MixedProblem, policy: &Policy) -> Result<(f64, SymMatrix)> {
    let sol = cost_riccati(problem, policy)?;
    let j = (problem.h2_weight(policy) * sol.x.as_matrix()).trace();
    Ok((j, sol.x))
}

fn require_single_channel(problem: &MixedProblem) -> Result<()> {
    if problem.is_single_channel() {
        Ok(())
    } else {
        Err(Error::NotSingleChannel)
    }
}

fn single_channel_riccati(problem: &MixedProblem, policy: &Policy) -> Result<RiccatiSolution> {
    require_single_channel(problem)?;
    problem.check_policy(policy)?;
    let a_k = problem.closed_loop(policy);
    if !is_hurwitz(&a_k, 0.0)? {
        return Err(Error::InfeasiblePolicy);
    }
    let beta = problem.beta();
    let d = problem.w().as_matrix() / (beta * beta);
    solve_care_dual(&a_k, &d, &problem.s_k(policy), RiccatiKind::Stabilizing).map_err(infeasible)
}

/// Single-channel cost `tr(P_K W)` and `P_K`.
pub fn eval_cost_1ch(problem: &MixedProblem, policy: &Policy) -> Result<(f64, SymMatrix)> {
    let sol = single_channel_riccati(problem, policy)?;
    let j = (sol.x.as_matrix() * problem.w().as_matrix()).trace();
    Ok((j, sol.x))
}

/// Riccati solution on the closure of `K_β`: stabilizing in the interior,
/// minimal on the boundary `‖T∞(K)‖ = β`.
pub fn closure_riccati(problem: &MixedProblem, policy: &Policy) -> Result<RiccatiSolution> {
    problem.check_policy(policy)?;
    let a_k = problem.closed_loop(policy);
    if !is_hurwitz(&a_k, 0.0)? {
        return Err(Error::Unstable);
    }
    match cost_riccati(problem, policy) {
        Ok(sol) => Ok(sol),
        Err(Error::InfeasiblePolicy) => {
            let beta = problem.beta();
            let norm = policy_hinf_norm(problem, policy, 1e-9)?;
            if norm > beta * (1.0 + MARGINAL_REL) {
                return Err(Error::OutsideClosure);
            }
            let d = problem.s_k(policy) / (beta * beta);
            solve_care_primal(&a_k, &d, problem.w(), RiccatiKind::Minimal)
        }
        Err(e) => Err(e),
    }
}

/// Cost extended to the boundary of `K_β` through the minimal Riccati
/// solution; equals [`eval_cost_2ch`] in the interior.
pub fn eval_cost_boundary(problem: &MixedProblem, policy: &Policy) -> Result<f64> {
    let sol = closure_riccati(problem, policy)?;
    Ok((problem.h2_weight(policy) * sol.x.as_matrix()).trace())
}

/// Closed-loop H2 norm, `‖T₂‖² = tr((Q₂ + Kᵀ R₂ K) X̂_K)`.
pub fn h2_norm(problem: &MixedProblem, policy: &Policy) -> Result<f64> {
    problem.check_policy(policy)?;
    let a_k = problem.closed_loop(policy);
    let xh = solve_lyapunov(&a_k, problem.w()).map_err(|e| match e {
        Error::UnstableCoefficient => Error::Unstable,
        other => other,
    })?;
    let v = (problem.h2_weight(policy) * xh.as_matrix()).trace();
    Ok(v.max(0.0).sqrt())
}

/// Intermediate quantities of the two-channel gradient.
#[derive(Debug, Clone)]
pub struct GradientParts {
    pub j: f64,
    pub x: SymMatrix,
    pub gamma: SymMatrix,
    pub grad: Matrix,
}

fn require_interior(problem: &MixedProblem, policy: &Policy) -> Result<RiccatiSolution> {
    let feas = is_feasible(problem, policy)?;
    if !feas.feasible {
        return Err(Error::InfeasiblePolicy);
    }
    if feas.marginal {
        return Err(Error::MarginalPolicy);
    }
    Ok(feas.certificate.expect("feasible policies carry a certificate"))
}

/// `∇J = 2 (R₂ K + Bᵀ Γ + β⁻² R∞ K X Γ) X`, with
/// `Ãᵀ Γ + Γ Ã + Q₂ + Kᵀ R₂ K = 0`, `Ã = A_K + β⁻² X S_K`.
pub fn gradient_parts_2ch(problem: &MixedProblem, policy: &Policy) -> Result<GradientParts> {
    let cert = require_interior(problem, policy)?;
    gradient_parts_from_x(problem, policy, cert.x)
}

/// Gradient pieces given an already certified interior solution `X_K`.
pub fn gradient_parts_from_x(problem: &MixedProblem, policy: &Policy, x: SymMatrix) -> Result<GradientParts> {
    let beta2 = problem.beta() * problem.beta();
    let k = &policy.k;
    let a_tilde = problem.closed_loop(policy) + x.as_matrix() * problem.s_k(policy) / beta2;
    let weight = problem.h2_weight(policy);
    let gamma = solve_lyapunov_transposed(&a_tilde, &weight).map_err(infeasible)?;
    let inner = problem.r2().as_matrix() * k
        + problem.b().transpose() * gamma.as_matrix()
        + problem.rinf().as_matrix() * k * x.as_matrix() * gamma.as_matrix() / beta2;
    let grad = inner * x.as_matrix() * 2.0;
    let j = (weight * x.as_matrix()).trace();
    Ok(GradientParts { j, x, gamma, grad })
}

/// Exact two-channel policy gradient.
pub fn grad_2ch(problem: &MixedProblem, policy: &Policy) -> Result<Matrix> {
    Ok(gradient_parts_2ch(problem, policy)?.grad)
}

/// Single-channel gradient `2 (R K + Bᵀ P_K) Λ_K`, with
/// `Â Λ + Λ Âᵀ + W = 0`, `Â = A_K + β⁻² W P_K`.
pub fn grad_1ch(problem: &MixedProblem, policy: &Policy) -> Result<Matrix> {
    require_single_channel(problem)?;
    require_interior(problem, policy)?;
    let sol = single_channel_riccati(problem, policy)?;
    let p = sol.x.as_matrix();
    let beta2 = problem.beta() * problem.beta();
    let a_hat = problem.closed_loop(policy) + problem.w().as_matrix() * p / beta2;
    let lambda = solve_lyapunov(&a_hat, problem.w()).map_err(infeasible)?;
    let inner = problem.r2().as_matrix() * &policy.k + problem.b().transpose() * p;
    Ok(inner * lambda.as_matrix() * 2.0)
}

/// Central finite differences of [`eval_cost_2ch`], entry by entry.
pub fn fd_gradient(problem: &MixedProblem, policy: &Policy, step: f64) -> Result<Matrix> {
    problem.check_policy(policy)?;
    eval_cost_2ch(problem, policy)?;
    let (m, n) = policy.k.shape();
    let mut g = Matrix::zeros(m, n);
    let eval = |k: Matrix| -> Result<f64> {
        eval_cost_2ch(problem, &Policy { k })
            .map(|(j, _)| j)
            .map_err(|e| match e {
                Error::InfeasiblePolicy => Error::StepTooLarge,
                other => other,
            })
    };
    for i in 0..m {
        for j in 0..n {
            let mut kp = policy.k.clone();
            kp[(i, j)] += step;
            let mut km = policy.k.clone();
            km[(i, j)] -= step;
            g[(i, j)] = (eval(kp)? - eval(km)?) / (2.0 * step);
        }
    }
    Ok(g)
}

/// Central difference of the cost along direction `dir`.
pub fn fd_directional(problem: &MixedProblem, policy: &Policy, dir: &Matrix, step: f64) -> Result<f64> {
    let eval = |k: Matrix| -> Result<f64> {
        eval_cost_2ch(problem, &Policy { k })
            .map(|(j, _)| j)
            .map_err(|e| match e {
                Error::InfeasiblePolicy => Error::StepTooLarge,
                other => other,
            })
    };
    let plus = eval(&policy.k + dir * step)?;
    let minus = eval(&policy.k - dir * step)?;
    Ok((plus - minus) / (2.0 * step))
}

/// Residuals of the two-channel optimality conditions.
#[derive(Debug, Clone)]
pub struct OptimalityResiduals {
    pub alpha: f64,
    /// `‖K + R₂⁻¹ Bᵀ Γ (I + β⁻² α² X Γ)⁻¹‖`
    pub stationarity: f64,
    /// Riccati residual of `X`.
    pub riccati: f64,
    /// Lyapunov residual of `Γ`.
    pub lyapunov: f64,
    pub tilde_abscissa: f64,
    pub tilde_hurwitz: bool,
}

impl OptimalityResiduals {
    pub fn max_residual(&self) -> f64 {
        self.stationarity.max(self.riccati).max(self.lyapunov)
    }
}

/// `α` with `R∞ = α² R₂`, recovered as `√(tr R∞ / tr R₂)` and verified
/// entrywise.
pub fn extract_alpha(problem: &MixedProblem) -> Result<f64> {
    let r2 = problem.r2().as_matrix();
    let rinf = problem.rinf().as_matrix();
    let alpha2 = rinf.trace() / r2.trace();
    if (rinf - r2 * alpha2).amax() > 1e-10 * (1.0 + rinf.amax()) {
        return Err(Error::NotScalarMultiple);
    }
    Ok(alpha2.sqrt())
}

/// Evaluates the two-channel optimality conditions at `K`.
pub fn check_optimality_2ch(problem: &MixedProblem, policy: &Policy) -> Result<OptimalityResiduals> {
    let alpha = extract_alpha(problem)?;
    let parts = gradient_parts_2ch(problem, policy)?;
    let n = problem.n();
    let beta2 = problem.beta() * problem.beta();
    let x = parts.x.as_matrix();
    let g = parts.gamma.as_matrix();
    let a_k = problem.closed_loop(policy);
    let s_k = problem.s_k(policy);
    let a_tilde = &a_k + x * &s_k / beta2;
    let inner = Matrix::identity(n, n) + x * g * (alpha * alpha / beta2);
    let inner_inv = inner.try_inverse().ok_or(Error::InfeasiblePolicy)?;
    let k_opt = -(problem.r2_inv() * problem.b().transpose() * g * inner_inv);
    let stationarity = (&policy.k - k_opt).norm();
    let riccati = care_residual(&a_k, &(s_k / beta2), problem.w(), x)?;
    let weight = problem.h2_weight(policy);
    let lyapunov = (a_tilde.transpose() * g + g * &a_tilde + weight).norm();
    let tilde_abscissa = crate::linalg::spectral_abscissa(&a_tilde)?;
    Ok(OptimalityResiduals {
        alpha,
        stationarity,
        riccati,
        lyapunov,
        tilde_abscissa,
        tilde_hurwitz: tilde_abscissa < 0.0,
    })
}

/// Cost, gradient and norms of one policy. Fails only for non-stabilizing
/// policies.
pub fn evaluate(problem: &MixedProblem, policy: &Policy) -> Result<CostReport> {
    let h2 = h2_norm(problem, policy)?;
    let hinf = policy_hinf_norm(problem, policy, 1e-9)?;
    let feas = is_feasible(problem, policy)?;
    if feas.interior() {
        let parts = gradient_parts_2ch(problem, policy)?;
        let grad_norm = parts.grad.norm();
        return Ok(CostReport {
            j_mix: parts.j,
            grad: Some(parts.grad),
            grad_norm,
            h2_norm: h2,
            hinf_norm: hinf,
            feasible: true,
            marginal: false,
            x_k: Some(parts.x),
        });
    }
    let (j_mix, x_k) = match closure_riccati(problem, policy) {
        Ok(sol) => ((problem.h2_weight(policy) * sol.x.as_matrix()).trace(), Some(sol.x)),
        Err(Error::OutsideClosure) => (f64::NAN, None),
        Err(e) => return Err(e),
    };
    Ok(CostReport {
        j_mix,
        grad: None,
        grad_norm: f64::NAN,
        h2_norm: h2,
        hinf_norm: hinf,
        feasible: feas.feasible,
        marginal: feas.marginal,
        x_k,
    })
}
