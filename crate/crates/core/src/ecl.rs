//! Extended convex lifting: the lifted set `L`, the convex set `F`, the
//! change of variables `Φ(K, γ, X) = (γ, X, K X)` and its inverse.
//!
//! `(K, γ, X) ∈ L` iff `X ≻ 0`, `γ ≥ tr(Q₂ X) + tr(R₂ K X Kᵀ)` and
//! `A_K X + X A_Kᵀ + β⁻² X S_K X + W ⪯ 0`. `F` is the same set written in
//! `(γ, X, Y)` with the Riccati inequality expressed as a block LMI.
//!
//! Both tests use the same tolerance `tol`. `member_cvx` accepts when
//! `λ_max(F) ≤ tol`; `member_lifted` applies the exact Schur complement of
//! `F - tol I`, which replaces `β²` by `β² + tol`, so the two verdicts
//! agree whenever rounding does not straddle the threshold.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};
use crate::mixedcost::closure_riccati;
use crate::problem::{MixedProblem, Policy};

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint {
    pub k: Matrix,
    pub gamma: f64,
    pub x: SymMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvxPoint {
    pub gamma: f64,
    pub x: SymMatrix,
    pub y: Matrix,
}

fn require_pd(x: &SymMatrix) -> Result<()> {
    let ev = x.eigenvalues();
    let scale = 1.0 + ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if ev.first().copied().unwrap_or(0.0) <= 1e-10 * scale {
        return Err(Error::Assumption {
            assumption: "lifting",
            detail: "X must be positive definite".into(),
        });
    }
    Ok(())
}

impl LiftedPoint {
    pub fn new(k: Matrix, gamma: f64, x: SymMatrix) -> Result<Self> {
        if k.ncols() != x.dim() {
            return Err(Error::DimensionMismatch(format!(
                "K has {} columns, X is {1}x{1}",
                k.ncols(),
                x.dim()
            )));
        }
        require_pd(&x)?;
        Ok(Self { k, gamma, x })
    }
}

impl CvxPoint {
    pub fn new(gamma: f64, x: SymMatrix, y: Matrix) -> Result<Self> {
        if y.ncols() != x.dim() {
            return Err(Error::DimensionMismatch(format!(
                "Y has {} columns, X is {1}x{1}",
                y.ncols(),
                x.dim()
            )));
        }
        require_pd(&x)?;
        Ok(Self { gamma, x, y })
    }
}

/// Margins behind a membership verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// `γ - tr(...)`; nonnegative (up to tolerance) for members.
    pub trace_slack: f64,
    /// Largest eigenvalue of the Riccati expression (lifted) or of the
    /// block matrix (convex).
    pub max_eig: f64,
}

/// Default membership tolerance `1e-8 (1 + ‖W‖)`.
pub fn default_tol(problem: &MixedProblem) -> f64 {
    1e-8 * (1.0 + problem.w().max_eigenvalue())
}

fn check_dims(problem: &MixedProblem, rows: usize, cols: usize, xdim: usize) -> Result<()> {
    if rows != problem.m() || cols != problem.n() || xdim != problem.n() {
        return Err(Error::DimensionMismatch(format!(
            "point is ({rows}x{cols}, X {xdim}x{xdim}), problem has m={}, n={}",
            problem.m(),
            problem.n()
        )));
    }
    Ok(())
}

fn trace_ok(gamma: f64, trace: f64, tol: f64) -> bool {
    gamma >= trace - tol * (1.0 + gamma.abs())
}

/// Membership of `(K, γ, X)` in the lifted set.
pub fn member_lifted(problem: &MixedProblem, p: &LiftedPoint, tol: f64) -> Result<Membership> {
    check_dims(problem, p.k.nrows(), p.k.ncols(), p.x.dim())?;
    let policy = Policy { k: p.k.clone() };
    let x = p.x.as_matrix();
    let a_k = problem.closed_loop(&policy);
    let s_k = problem.s_k(&policy);
    let trace =
        (problem.q2().as_matrix() * x).trace() + (problem.r2().as_matrix() * &p.k * x * p.k.transpose()).trace();
    let base = &a_k * x + x * a_k.transpose() + problem.w().as_matrix();
    let quad = x * &s_k * x;
    let beta2 = problem.beta() * problem.beta();
    let report_eig = SymMatrix::symmetrize(&base + &quad / beta2).max_eigenvalue();
    let decide_eig = SymMatrix::symmetrize(&base + &quad / (beta2 + tol)).max_eigenvalue();
    let member = trace_ok(p.gamma, trace, tol) && decide_eig <= tol;
    Ok(Membership {
        member,
        trace_slack: p.gamma - trace,
        max_eig: report_eig,
    })
}

/// The symmetric block matrix
/// `[[A X + X Aᵀ + B Y + Yᵀ Bᵀ + W, X Q∞^½, Yᵀ R∞^½], [Q∞^½ X, -β² I, 0], [R∞^½ Y, 0, -β² I]]`.
pub fn lmi_block(problem: &MixedProblem, q: &CvxPoint) -> Matrix {
    let n = problem.n();
    let m = problem.m();
    let x = q.x.as_matrix();
    let a = problem.a();
    let b = problem.b();
    let by = b * &q.y;
    let top = a * x + x * a.transpose() + &by + by.transpose() + problem.w().as_matrix();
    let xq = x * problem.qinf_sqrt().as_matrix();
    let yr = q.y.transpose() * problem.rinf_sqrt().as_matrix();
    let beta2 = problem.beta() * problem.beta();
    let size = 2 * n + m;
    let mut f = Matrix::zeros(size, size);
    f.view_mut((0, 0), (n, n)).copy_from(&top);
    f.view_mut((0, n), (n, n)).copy_from(&xq);
    f.view_mut((n, 0), (n, n)).copy_from(&xq.transpose());
    f.view_mut((0, 2 * n), (n, m)).copy_from(&yr);
    f.view_mut((2 * n, 0), (m, n)).copy_from(&yr.transpose());
    for i in n..size {
        f[(i, i)] = -beta2;
    }
    f
}

/// Membership of `(γ, X, Y)` in the convex set.
pub fn member_cvx(problem: &MixedProblem, q: &CvxPoint, tol: f64) -> Result<Membership> {
    check_dims(problem, q.y.nrows(), q.y.ncols(), q.x.dim())?;
    let x = q.x.as_matrix();
    let x_inv_yt = x
        .clone()
        .cholesky()
        .map(|c| c.solve(&q.y.transpose()))
        .ok_or(Error::SingularLift(f64::INFINITY))?;
    let trace = (problem.q2().as_matrix() * x).trace() + (problem.r2().as_matrix() * &q.y * x_inv_yt).trace();
    let max_eig = SymMatrix::symmetrize(lmi_block(problem, q)).max_eigenvalue();
    Ok(Membership {
        member: trace_ok(q.gamma, trace, tol) && max_eig <= tol,
        trace_slack: q.gamma - trace,
        max_eig,
    })
}

/// `Φ(K, γ, X) = (γ, X, K X)`.
pub fn phi(p: &LiftedPoint) -> CvxPoint {
    CvxPoint {
        gamma: p.gamma,
        x: p.x.clone(),
        y: &p.k * p.x.as_matrix(),
    }
}

/// `Ψ(γ, X, Y) = (Y X⁻¹, γ, X)`.
pub fn psi(q: &CvxPoint) -> Result<LiftedPoint> {
    let ev = q.x.eigenvalues();
    let lo = ev.first().copied().unwrap_or(0.0);
    let hi = ev.last().copied().unwrap_or(0.0);
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= 1e12) {
        return Err(Error::SingularLift(cond));
    }
    // K = Y X⁻¹  ⇔  X Kᵀ = Yᵀ.
    let kt =
        q.x.as_matrix()
            .clone()
            .lu()
            .solve(&q.y.transpose())
            .ok_or(Error::SingularLift(cond))?;
    Ok(LiftedPoint {
        k: kt.transpose(),
        gamma: q.gamma,
        x: q.x.clone(),
    })
}

/// Witness that `(K, J(K))` lies in the projection of the lifted set:
/// `X_K` in the interior of `K_β`, the minimal solution on its boundary.
pub fn certify_nondegenerate(problem: &MixedProblem, policy: &Policy) -> Result<(bool, LiftedPoint)> {
    let sol = closure_riccati(problem, policy).map_err(|e| match e {
        Error::OutsideClosure | Error::Unstable => Error::InfeasiblePolicy,
        other => other,
    })?;
    let gamma = (problem.h2_weight(policy) * sol.x.as_matrix()).trace();
    let point = LiftedPoint::new(policy.k.clone(), gamma, sol.x)?;
    let ok = member_lifted(problem, &point, default_tol(problem))?.member;
    Ok((ok, point))
}

#[derive(Debug, Clone)]
pub struct LiftRoundtrip {
    pub gamma: f64,
    pub member_cvx: bool,
    /// `‖Y X⁻¹ - K‖_max`.
    pub recovery_error: f64,
}

impl LiftRoundtrip {
    pub fn passed(&self) -> bool {
        self.member_cvx && self.recovery_error <= 1e-10 * 1f64.max(self.gamma.abs().sqrt())
    }
}

/// Lifts `K` to `(J(K), X_K, K X_K)`, checks convex membership and recovers
/// the policy through `Ψ`.
pub fn lift_solution_roundtrip(problem: &MixedProblem, policy: &Policy) -> Result<LiftRoundtrip> {
    let (_, point) = certify_nondegenerate(problem, policy)?;
    let q = phi(&point);
    let member = member_cvx(problem, &q, default_tol(problem))?.member;
    let back = psi(&q)?;
    Ok(LiftRoundtrip {
        gamma: point.gamma,
        member_cvx: member,
        recovery_error: (&back.k - &policy.k).amax(),
    })
}
