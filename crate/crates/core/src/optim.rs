//! Policy optimization: the analytic single-channel optimum, policy
//! iteration for both costs, feasibility-guarded gradient descent, the LQR
//! limit and a multistart check for spurious stationary points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hinf::{is_feasible, policy_hinf_norm};
use crate::linalg::{solve_lyapunov, Matrix, SymMatrix};
use crate::mixedcost::{eval_cost_1ch, extract_alpha, grad_1ch, gradient_parts_2ch, gradient_parts_from_x};
use crate::problem::{MixedProblem, Policy};
use crate::riccati::{solve_care_dual, RiccatiKind};

/// Iteration controls shared by all iterative solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub conv_tol: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub backtrack_ratio: f64,
    pub oscillation_window: usize,
    /// Record the closed-loop H∞ norm of every iterate. Each record costs
    /// a bisection, so large problems may want to switch it off.
    pub trace_hinf: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            conv_tol: 1e-5,
            step_init: 1.0,
            armijo_c: 1e-4,
            backtrack_ratio: 0.5,
            oscillation_window: 20,
            trace_hinf: true,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::Parse {
                field: "options".into(),
                detail: what.into(),
            })
        };
        if self.max_iters == 0 || self.oscillation_window == 0 {
            return bad("max_iters and oscillation_window must be positive");
        }
        if !(self.conv_tol > 0.0 && self.conv_tol < 1.0) {
            return bad("conv_tol must lie in (0, 1)");
        }
        if !(self.step_init > 0.0) {
            return bad("step_init must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) || !(self.backtrack_ratio > 0.0 && self.backtrack_ratio < 1.0)
        {
            return bad("armijo_c and backtrack_ratio must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Converged,
    MaxIters,
    LeftFeasibleSet,
    Oscillating,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterateRecord {
    pub iter: usize,
    pub j_mix: f64,
    pub grad_norm: f64,
    pub hinf_norm: f64,
    /// Gradient step length, or `‖K' - K‖` for policy iteration.
    pub step: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveTrace {
    pub iterates: Vec<IterateRecord>,
    pub outcome: Outcome,
    pub diagnostic: Option<String>,
}

impl SolveTrace {
    fn new() -> Self {
        Self {
            iterates: Vec::new(),
            outcome: Outcome::MaxIters,
            diagnostic: None,
        }
    }

    pub fn iterations(&self) -> usize {
        self.iterates.len()
    }

    pub fn last(&self) -> Option<&IterateRecord> {
        self.iterates.last()
    }
}

/// Which cost a first-order method descends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CostChannel {
    Single,
    Mixed,
}

#[derive(Debug, Clone)]
pub struct LqrSolution {
    pub policy: Policy,
    pub p: SymMatrix,
    /// `tr((Q + Kᵀ R K) X̂_K)` with `A_K X̂ + X̂ A_Kᵀ + W = 0`.
    pub cost: f64,
}

/// LQR gain from `Aᵀ P + P A - P B R⁻¹ Bᵀ P + Q = 0`, `K = -R⁻¹ Bᵀ P`.
pub fn solve_lqr(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix, w: &Matrix) -> Result<LqrSolution> {
    let r_inv = r.clone().try_inverse().ok_or(Error::NonStabilizable)?;
    let d = -(b * &r_inv * b.transpose());
    let sol = solve_care_dual(a, &d, q, RiccatiKind::Stabilizing).map_err(|e| match e {
        Error::NoStabilizingSolution(_) => Error::NonStabilizable,
        other => other,
    })?;
    let k = -(&r_inv * b.transpose() * sol.x.as_matrix());
    let a_k = a + b * &k;
    let xh = solve_lyapunov(&a_k, w).map_err(|_| Error::NonStabilizable)?;
    let cost = ((q + k.transpose() * r * &k) * xh.as_matrix()).trace();
    Ok(LqrSolution {
        policy: Policy { k },
        p: sol.x,
        cost,
    })
}

/// Single-channel optimum `K = -R⁻¹ Bᵀ P` with `P` the stabilizing solution
/// of `Aᵀ P + P A + P (β⁻² W - B R⁻¹ Bᵀ) P + Q = 0`.
pub fn solve_analytic_1ch(problem: &MixedProblem) -> Result<(Policy, SymMatrix)> {
    if !problem.is_single_channel() {
        return Err(Error::NotSingleChannel);
    }
    let beta = problem.beta();
    let b = problem.b();
    let d = problem.w().as_matrix() / (beta * beta) - b * problem.r2_inv() * b.transpose();
    let sol = solve_care_dual(problem.a(), &d, problem.q2(), RiccatiKind::Stabilizing).map_err(|e| match e {
        Error::NoStabilizingSolution(_) => Error::BetaBelowBetaStar,
        other => other,
    })?;
    let scale = 1.0 + sol.x.amax();
    if sol.x.min_eigenvalue() < -1e-9 * scale {
        return Err(Error::BetaBelowBetaStar);
    }
    let k = -(problem.r2_inv() * b.transpose() * sol.x.as_matrix());
    Ok((Policy { k }, sol.x))
}

fn require_feasible(problem: &MixedProblem, policy: &Policy) -> Result<()> {
    if is_feasible(problem, policy)?.feasible {
        Ok(())
    } else {
        Err(Error::InfeasiblePolicy)
    }
}

fn hinf_record(problem: &MixedProblem, policy: &Policy, opts: &SolveOptions) -> f64 {
    if opts.trace_hinf {
        policy_hinf_norm(problem, policy, 1e-8).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    }
}

/// Sliding-window limit-cycle test on `(update norm, cost)` histories.
struct OscillationDetector {
    window: usize,
    tol: f64,
    updates: Vec<f64>,
    costs: Vec<f64>,
}

impl OscillationDetector {
    fn new(opts: &SolveOptions) -> Self {
        Self {
            window: opts.oscillation_window,
            tol: opts.conv_tol,
            updates: Vec::new(),
            costs: Vec::new(),
        }
    }

    fn push(&mut self, update: f64, cost: f64) -> bool {
        self.updates.push(update);
        self.costs.push(cost);
        if self.updates.len() < self.window {
            return false;
        }
        let ups = &self.updates[self.updates.len() - self.window..];
        let cs = &self.costs[self.costs.len() - self.window..];
        if ups.iter().any(|&u| u <= self.tol) {
            return false;
        }
        // Geometric convergence is not a cycle: the updates must not keep
        // shrinking across the window.
        let max_up = ups.iter().cloned().fold(0.0, f64::max);
        let min_up = ups.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_up < 0.1 * max_up {
            return false;
        }
        let max_c = cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_c = cs.iter().cloned().fold(f64::INFINITY, f64::min);
        let mean = cs.iter().sum::<f64>() / cs.len() as f64;
        max_c - min_c < 0.01 * mean.abs()
    }
}

/// Single-channel policy iteration `K' = -R⁻¹ Bᵀ P_K`.
pub fn policy_iteration_1ch(problem: &MixedProblem, k0: &Policy, opts: &SolveOptions) -> Result<(Policy, SolveTrace)> {
    opts.validate()?;
    if !problem.is_single_channel() {
        return Err(Error::NotSingleChannel);
    }
    problem.check_policy(k0)?;
    require_feasible(problem, k0)?;
    let mut k = k0.clone();
    let mut trace = SolveTrace::new();
    let mut osc = OscillationDetector::new(opts);
    for iter in 0..opts.max_iters {
        let (j, p) = eval_cost_1ch(problem, &k)?;
        let next = Policy {
            k: -(problem.r2_inv() * problem.b().transpose() * p.as_matrix()),
        };
        let update = (&next.k - &k.k).norm();
        let grad_norm = grad_1ch(problem, &k).map(|g| g.norm()).unwrap_or(f64::NAN);
        trace.iterates.push(IterateRecord {
            iter,
            j_mix: j,
            grad_norm,
            hinf_norm: hinf_record(problem, &k, opts),
            step: update,
        });
        if !is_feasible(problem, &next)?.feasible {
            trace.outcome = Outcome::LeftFeasibleSet;
            trace.diagnostic = Some(format!("iterate {} is infeasible", iter + 1));
            return Ok((k, trace));
        }
        k = next;
        if update < opts.conv_tol {
            trace.outcome = Outcome::Converged;
            return Ok((k, trace));
        }
        if osc.push(update, j) {
            trace.outcome = Outcome::Oscillating;
            trace.diagnostic = Some(format!(
                "cost cycles over the last {} iterates",
                opts.oscillation_window
            ));
            return Ok((k, trace));
        }
    }
    trace.diagnostic = Some(format!("no convergence within {} iterations", opts.max_iters));
    Ok((k, trace))
}

/// Two-channel policy iteration
/// `K' = -R₂⁻¹ Bᵀ Γ_K (I + β⁻² α² X_K Γ_K)⁻¹`, a pure fixed point without
/// line search.
pub fn policy_iteration_2ch(problem: &MixedProblem, k0: &Policy, opts: &SolveOptions) -> Result<(Policy, SolveTrace)> {
    opts.validate()?;
    problem.check_policy(k0)?;
    let alpha = extract_alpha(problem)?;
    require_feasible(problem, k0)?;
    let n = problem.n();
    let beta2 = problem.beta() * problem.beta();
    let mut k = k0.clone();
    let mut trace = SolveTrace::new();
    let mut osc = OscillationDetector::new(opts);
    for iter in 0..opts.max_iters {
        let parts = match gradient_parts_2ch(problem, &k) {
            Ok(p) => p,
            Err(Error::MarginalPolicy) => {
                trace.outcome = Outcome::LeftFeasibleSet;
                trace.diagnostic = Some(format!("iterate {iter} reached the boundary of the feasible set"));
                return Ok((k, trace));
            }
            Err(e) => return Err(e),
        };
        let x = parts.x.as_matrix();
        let g = parts.gamma.as_matrix();
        let inner = Matrix::identity(n, n) + x * g * (alpha * alpha / beta2);
        let Some(inner_inv) = inner.try_inverse() else {
            trace.outcome = Outcome::LeftFeasibleSet;
            trace.diagnostic = Some(format!("update at iterate {iter} is singular"));
            return Ok((k, trace));
        };
        let next = Policy {
            k: -(problem.r2_inv() * problem.b().transpose() * g * inner_inv),
        };
        let update = (&next.k - &k.k).norm();
        trace.iterates.push(IterateRecord {
            iter,
            j_mix: parts.j,
            grad_norm: parts.grad.norm(),
            hinf_norm: hinf_record(problem, &k, opts),
            step: update,
        });
        if !next.k.iter().all(|v| v.is_finite()) || !is_feasible(problem, &next)?.feasible {
            trace.outcome = Outcome::LeftFeasibleSet;
            trace.diagnostic = Some(format!("iterate {} is infeasible", iter + 1));
            return Ok((k, trace));
        }
        k = next;
        if update < opts.conv_tol {
            trace.outcome = Outcome::Converged;
            return Ok((k, trace));
        }
        if osc.push(update, parts.j) {
            trace.outcome = Outcome::Oscillating;
            trace.diagnostic = Some(format!(
                "cost cycles over the last {} iterates",
                opts.oscillation_window
            ));
            return Ok((k, trace));
        }
    }
    trace.diagnostic = Some(format!("no convergence within {} iterations", opts.max_iters));
    Ok((k, trace))
}

/// Cost and gradient at an interior point, `None` when `K` is infeasible or
/// marginal.
fn cost_and_grad(problem: &MixedProblem, policy: &Policy, channel: CostChannel) -> Result<Option<(f64, Matrix)>> {
    let feas = is_feasible(problem, policy)?;
    if !feas.interior() {
        return Ok(None);
    }
    match channel {
        CostChannel::Mixed => {
            let cert = feas.certificate.expect("feasible policies carry a certificate");
            let parts = gradient_parts_from_x(problem, policy, cert.x)?;
            Ok(Some((parts.j, parts.grad)))
        }
        CostChannel::Single => {
            let (j, _) = eval_cost_1ch(problem, policy)?;
            Ok(Some((j, grad_1ch(problem, policy)?)))
        }
    }
}

/// Trial cost only; gradients are computed once a step is accepted.
fn trial_cost(problem: &MixedProblem, policy: &Policy, channel: CostChannel) -> Result<Option<f64>> {
    let feas = is_feasible(problem, policy)?;
    if !feas.interior() {
        return Ok(None);
    }
    match channel {
        CostChannel::Mixed => {
            let cert = feas.certificate.expect("feasible policies carry a certificate");
            Ok(Some((problem.h2_weight(policy) * cert.x.as_matrix()).trace()))
        }
        CostChannel::Single => Ok(Some(eval_cost_1ch(problem, policy)?.0)),
    }
}

const MIN_STEP: f64 = 1e-14;

/// Armijo gradient descent with a Barzilai-Borwein trial step and a
/// feasibility guard: trial steps leaving `K_β` or landing on a marginal
/// policy are halved.
///
/// Convergence needs `‖∇J‖ < conv_tol (1 + |J|)` and an accepted step that
/// was not shortened by the guard. Runs pressed against the boundary, where
/// the gradient may vanish only in the limit, end as `MaxIters`.
pub fn gradient_descent(
    problem: &MixedProblem,
    k0: &Policy,
    opts: &SolveOptions,
    channel: CostChannel,
) -> Result<(Policy, SolveTrace)> {
    opts.validate()?;
    problem.check_policy(k0)?;
    if channel == CostChannel::Single && !problem.is_single_channel() {
        return Err(Error::NotSingleChannel);
    }
    let Some((mut j, mut g)) = cost_and_grad(problem, k0, channel)? else {
        return Err(if is_feasible(problem, k0)?.feasible {
            Error::MarginalPolicy
        } else {
            Error::InfeasiblePolicy
        });
    };
    let mut k = k0.clone();
    let mut trace = SolveTrace::new();
    let mut guard_limited = false;
    let mut prev: Option<(Matrix, Matrix)> = None;
    for iter in 0..opts.max_iters {
        let grad_norm = g.norm();
        trace.iterates.push(IterateRecord {
            iter,
            j_mix: j,
            grad_norm,
            hinf_norm: hinf_record(problem, &k, opts),
            step: 0.0,
        });
        if grad_norm < opts.conv_tol * (1.0 + j.abs()) && !guard_limited {
            trace.outcome = Outcome::Converged;
            return Ok((k, trace));
        }
        let mut step = match &prev {
            Some((s, y)) => {
                let sy = s.dot(y);
                if sy > 0.0 {
                    (s.dot(s) / sy).min(1e6)
                } else {
                    opts.step_init
                }
            }
            None => opts.step_init,
        };
        let g2 = grad_norm * grad_norm;
        guard_limited = false;
        let accepted = loop {
            if step < MIN_STEP {
                break None;
            }
            let trial = Policy { k: &k.k - &g * step };
            match trial_cost(problem, &trial, channel)? {
                None => guard_limited = true,
                Some(jt) if jt <= j - opts.armijo_c * step * g2 => break Some((trial, jt)),
                Some(_) => {}
            }
            step *= opts.backtrack_ratio;
        };
        let Some((trial, _)) = accepted else {
            trace.diagnostic = Some(format!(
                "step underflow below {MIN_STEP:e} at iteration {iter} (grad norm {grad_norm:.3e}{})",
                if guard_limited {
                    ", feasibility guard active"
                } else {
                    ""
                }
            ));
            return Ok((k, trace));
        };
        let Some((jn, gn)) = cost_and_grad(problem, &trial, channel)? else {
            return Err(Error::InfeasiblePolicy);
        };
        if let Some(last) = trace.iterates.last_mut() {
            last.step = step;
        }
        prev = Some((&trial.k - &k.k, &gn - &g));
        k = trial;
        j = jn;
        g = gn;
    }
    trace.diagnostic = Some(format!(
        "no convergence within {} iterations (grad norm {:.3e}{})",
        opts.max_iters,
        g.norm(),
        if guard_limited {
            ", feasibility guard active"
        } else {
            ""
        }
    ));
    Ok((k, trace))
}

/// Central H∞ gain `-R∞⁻¹ Bᵀ P` from the game Riccati equation at `β`.
pub fn central_gain(problem: &MixedProblem) -> Result<Policy> {
    let beta = problem.beta();
    let b = problem.b();
    let d = problem.w().as_matrix() / (beta * beta) - b * problem.rinf_inv() * b.transpose();
    let sol = solve_care_dual(problem.a(), &d, problem.qinf(), RiccatiKind::Stabilizing).map_err(|e| match e {
        Error::NoStabilizingSolution(_) => Error::BetaBelowBetaStar,
        other => other,
    })?;
    Ok(Policy {
        k: -(problem.rinf_inv() * b.transpose() * sol.x.as_matrix()),
    })
}

/// A feasible, non-marginal base policy: LQR gains for `(Q₂, c R₂)` with
/// `c = 1, 2, 4, ...`, falling back to the central H∞ gain.
pub fn feasible_base(problem: &MixedProblem) -> Result<Policy> {
    let mut c = 1.0;
    for _ in 0..12 {
        let r = problem.r2().as_matrix() * c;
        if let Ok(lqr) = solve_lqr(problem.a(), problem.b(), problem.q2(), &r, problem.w()) {
            if is_feasible(problem, &lqr.policy)?.interior() {
                return Ok(lqr.policy);
            }
        }
        c *= 2.0;
    }
    let central = central_gain(problem).map_err(|_| Error::SamplerFailed(12))?;
    if is_feasible(problem, &central)?.interior() {
        Ok(central)
    } else {
        Err(Error::SamplerFailed(13))
    }
}

/// `count` feasible policies drawn from shrinking balls around
/// [`feasible_base`]. Deterministic in `seed`.
pub fn sample_feasible_starts(problem: &MixedProblem, count: usize, seed: u64) -> Result<Vec<Policy>> {
    let budget = 1000 * count.max(1);
    let base = feasible_base(problem)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, n) = base.k.shape();
    let mut starts = Vec::with_capacity(count);
    let mut trials = 0;
    while starts.len() < count {
        let mut radius = 0.5 * base.norm().max(1.0);
        loop {
            trials += 1;
            if trials > budget {
                return Err(Error::SamplerFailed(trials - 1));
            }
            let dir = Matrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let dir = &dir / dir.norm().max(f64::MIN_POSITIVE);
            let u: f64 = rng.random();
            let cand = Policy {
                k: &base.k + dir * (radius * u),
            };
            if is_feasible(problem, &cand)?.interior() {
                starts.push(cand);
                break;
            }
            radius *= 0.5;
        }
    }
    Ok(starts)
}

#[derive(Debug, Clone, Serialize)]
pub struct MultistartRun {
    pub j_mix: f64,
    pub outcome: Outcome,
    pub iterations: usize,
    #[serde(skip)]
    pub policy: Policy,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultistartReport {
    pub runs: Vec<MultistartRun>,
    pub converged: usize,
    /// `(max J - min J) / |min J|` over converged runs.
    pub max_relative_gap: f64,
    /// Largest Frobenius distance between converged policies.
    pub max_policy_gap: f64,
    pub best_j: f64,
}

/// Gradient descent from `n_starts` sampled feasible policies, run in
/// parallel on the current rayon pool.
pub fn multistart_global_check(
    problem: &MixedProblem,
    n_starts: usize,
    seed: u64,
    channel: CostChannel,
    opts: &SolveOptions,
) -> Result<MultistartReport> {
    let starts = sample_feasible_starts(problem, n_starts, seed)?;
    let runs: Vec<MultistartRun> = starts
        .par_iter()
        .map(|k0| {
            gradient_descent(problem, k0, opts, channel).map(|(k, trace)| MultistartRun {
                j_mix: trace.last().map(|r| r.j_mix).unwrap_or(f64::NAN),
                outcome: trace.outcome,
                iterations: trace.iterations(),
                policy: k,
            })
        })
        .collect::<Result<_>>()?;
    let done: Vec<&MultistartRun> = runs.iter().filter(|r| r.outcome == Outcome::Converged).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in &done {
        lo = lo.min(r.j_mix);
        hi = hi.max(r.j_mix);
    }
    let mut max_policy_gap: f64 = 0.0;
    for (i, a) in done.iter().enumerate() {
        for b in &done[i + 1..] {
            max_policy_gap = max_policy_gap.max((&a.policy.k - &b.policy.k).norm());
        }
    }
    let max_relative_gap = if done.is_empty() {
        f64::NAN
    } else {
        (hi - lo) / lo.abs().max(f64::MIN_POSITIVE)
    };
    Ok(MultistartReport {
        converged: done.len(),
        max_relative_gap,
        max_policy_gap,
        best_j: if done.is_empty() { f64::NAN } else { lo },
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn lqr_scalar_root() {
        let s = solve_lqr(
            &dmatrix![1.0],
            &dmatrix![1.0],
            &dmatrix![1.0],
            &dmatrix![1.0],
            &dmatrix![1.0],
        )
        .unwrap();
        let r2 = 2f64.sqrt();
        assert!((s.p[(0, 0)] - (1.0 + r2)).abs() < 1e-12);
        assert!((s.policy.k[(0, 0)] + 1.0 + r2).abs() < 1e-12);
    }

    #[test]
    fn lqr_two_by_two() {
        let i = Matrix::identity(2, 2);
        let s = solve_lqr(&(-&i), &i, &i, &i, &i).unwrap();
        let v = 2f64.sqrt() - 1.0;
        assert!((s.p.as_matrix() - &i * v).amax() < 1e-12);
        assert!((s.policy.k.clone() + &i * v).amax() < 1e-12);
    }

    #[test]
    fn lqr_rejects_unstabilizable() {
        let a = dmatrix![1.0, 0.0; 0.0, 1.0];
        let b = dmatrix![1.0; 0.0];
        let i = Matrix::identity(2, 2);
        assert_eq!(
            solve_lqr(&a, &b, &i, &dmatrix![1.0], &i).unwrap_err(),
            Error::NonStabilizable
        );
    }

    #[test]
    fn options_validation() {
        assert!(SolveOptions::default().validate().is_ok());
        let bad = SolveOptions {
            conv_tol: 2.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn oscillation_needs_flat_costs() {
        let opts = SolveOptions {
            oscillation_window: 4,
            ..Default::default()
        };
        let mut d = OscillationDetector::new(&opts);
        let hits: Vec<bool> = [1.0, 2.0, 1.0, 2.0].iter().map(|&c| d.push(0.5, c)).collect();
        assert!(!hits.iter().any(|&h| h));
        let mut d = OscillationDetector::new(&opts);
        let hits: Vec<bool> = [5.0, 5.01, 5.0, 5.01].iter().map(|&c| d.push(0.5, c)).collect();
        assert!(hits[3]);
    }

    #[test]
    fn shrinking_updates_are_not_a_cycle() {
        let opts = SolveOptions {
            oscillation_window: 4,
            ..Default::default()
        };
        let mut d = OscillationDetector::new(&opts);
        let hits: Vec<bool> = [1.0, 0.3, 0.08, 0.02].iter().map(|&u| d.push(u, 5.0)).collect();
        assert!(!hits[3]);
    }
}
