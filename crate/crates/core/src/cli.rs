//! Command-line front end: instance files, solve reports, landscape sweeps,
//! β* estimation, the verification suite and instance generation.
//!
//! Every command returns a [`CmdOutput`] carrying the text to print and
//! the process exit code; the binary only parses arguments and prints.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecl;
use crate::error::{Error, Result};
use crate::hinf::{beta_star, is_feasible, policy_hinf_norm};
use crate::linalg::{solve_lyapunov, spectral_abscissa, Matrix, SymMatrix};
use crate::mixedcost::{eval_cost_1ch, eval_cost_2ch, fd_directional, grad_1ch, grad_2ch, h2_norm};
use crate::optim::{
    gradient_descent, multistart_global_check, policy_iteration_1ch, policy_iteration_2ch, sample_feasible_starts,
    solve_analytic_1ch, solve_lqr, CostChannel, Outcome, SolveOptions,
};
use crate::problem::{MixedProblem, Policy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Exit code for an error surfaced by a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_)
        | Error::Parse { .. }
        | Error::NonSquare { .. }
        | Error::DimensionMismatch(_)
        | Error::NonFinite(_) => EXIT_IO,
        Error::EigenFailure | Error::StepTooLarge => EXIT_NO_CONVERGENCE,
        _ => EXIT_INFEASIBLE,
    }
}

/// Text produced by a command together with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CmdOutput {
    pub text: String,
    pub exit: i32,
}

impl CmdOutput {
    fn ok(text: String) -> Self {
        Self { text, exit: EXIT_OK }
    }
}

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct GlobalFlags {
    pub beta: Option<f64>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub json: bool,
    pub check_assumptions: bool,
}

/// On-disk problem description. Matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(rename = "Bw")]
    pub bw: Vec<f64>,
    /// Optional for single-channel files, where it defaults to `Qinf`.
    #[serde(rename = "Q2", default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<Vec<f64>>,
    #[serde(rename = "R2", default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<Vec<f64>>,
    #[serde(rename = "Qinf")]
    pub qinf: Vec<f64>,
    #[serde(rename = "Rinf")]
    pub rinf: Vec<f64>,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_channel: Option<bool>,
    /// Accept a singular `Qinf` (degenerate robustness weight).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semidefinite_qinf: Option<bool>,
}

fn to_matrix(field: &str, data: &[f64], rows: usize, cols: usize) -> Result<Matrix> {
    if data.len() != rows * cols {
        return Err(Error::Parse {
            field: field.into(),
            detail: format!("expected {rows}x{cols} = {} entries, got {}", rows * cols, data.len()),
        });
    }
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::Parse {
            field: field.into(),
            detail: format!("entry {i} is not finite"),
        });
    }
    Ok(Matrix::from_row_slice(rows, cols, data))
}

fn to_sym(field: &str, data: &[f64], n: usize) -> Result<SymMatrix> {
    SymMatrix::new(to_matrix(field, data, n, n)?).map_err(|_| Error::Parse {
        field: field.into(),
        detail: "matrix is not symmetric".into(),
    })
}

fn row_major(m: &Matrix) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            field: format!("line {} column {}", e.line(), e.column()),
            detail: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn is_single_channel(&self) -> bool {
        self.single_channel.unwrap_or(false)
    }

    /// Builds and validates the problem.
    pub fn to_problem(&self) -> Result<MixedProblem> {
        let (n, m, p) = (self.n, self.m, self.p);
        if n == 0 || m == 0 || p == 0 {
            return Err(Error::Parse {
                field: "n, m, p".into(),
                detail: "dimensions must be positive".into(),
            });
        }
        let a = to_matrix("A", &self.a, n, n)?;
        let b = to_matrix("B", &self.b, n, m)?;
        let bw = to_matrix("Bw", &self.bw, n, p)?;
        let qinf = to_sym("Qinf", &self.qinf, n)?;
        let rinf = to_sym("Rinf", &self.rinf, m)?;
        let q2 = match (&self.q2, self.is_single_channel()) {
            (Some(v), _) => to_sym("Q2", v, n)?,
            (None, true) => qinf.clone(),
            (None, false) => {
                return Err(Error::Parse {
                    field: "Q2".into(),
                    detail: "required for two-channel instances".into(),
                })
            }
        };
        let r2 = match (&self.r2, self.is_single_channel()) {
            (Some(v), _) => to_sym("R2", v, m)?,
            (None, true) => rinf.clone(),
            (None, false) => {
                return Err(Error::Parse {
                    field: "R2".into(),
                    detail: "required for two-channel instances".into(),
                })
            }
        };
        if !self.beta.is_finite() && self.beta != f64::INFINITY {
            return Err(Error::Parse {
                field: "beta".into(),
                detail: "not a number".into(),
            });
        }
        let problem = if self.semidefinite_qinf.unwrap_or(false) {
            MixedProblem::new_semidefinite_qinf(a, b, bw, q2, r2, qinf, rinf, self.beta)?
        } else {
            MixedProblem::new(a, b, bw, q2, r2, qinf, rinf, self.beta)?
        };
        if self.is_single_channel() && !problem.is_single_channel() {
            return Err(Error::Parse {
                field: "single_channel".into(),
                detail: "flag set but H2 and H-infinity weights differ".into(),
            });
        }
        Ok(problem)
    }

    pub fn from_problem(name: &str, problem: &MixedProblem) -> Self {
        Self {
            name: name.into(),
            n: problem.n(),
            m: problem.m(),
            p: problem.p(),
            a: row_major(problem.a()),
            b: row_major(problem.b()),
            bw: row_major(problem.bw()),
            q2: Some(row_major(problem.q2())),
            r2: Some(row_major(problem.r2())),
            qinf: row_major(problem.qinf()),
            rinf: row_major(problem.rinf()),
            beta: problem.beta(),
            single_channel: problem.is_single_channel().then_some(true),
            semidefinite_qinf: None,
        }
    }
}

/// Reads an instance file.
pub fn read_instance(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    InstanceFile::parse(&text)
}

/// Reads and validates an instance; `--beta` overrides the stored level and
/// `--check-assumptions` additionally enforces `β > β*`.
pub fn load_instance(path: &Path, flags: &GlobalFlags) -> Result<MixedProblem> {
    let mut file = read_instance(path)?;
    if let Some(beta) = flags.beta {
        file.beta = beta;
    }
    let problem = file.to_problem()?;
    if flags.check_assumptions && problem.beta().is_finite() {
        problem.check_beta_assumption()?;
    }
    Ok(problem)
}

/// Parses a row-major policy given as comma or whitespace separated values.
pub fn parse_policy(text: &str, m: usize, n: usize) -> Result<Policy> {
    let vals: std::result::Result<Vec<f64>, _> = text
        .split(|c: char| c == ',' || c.is_whitespace() || c == '[' || c == ']')
        .filter(|s| !s.is_empty())
        .map(str::parse::<f64>)
        .collect();
    let vals = vals.map_err(|e| Error::Parse {
        field: "K".into(),
        detail: e.to_string(),
    })?;
    Ok(Policy {
        k: to_matrix("K", &vals, m, n)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Are,
    Pi,
    Gd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelArg {
    One,
    Two,
}

/// Machine-readable result of `solve`. Carries the instance so that the
/// report alone suffices to re-evaluate the cost.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub instance: InstanceFile,
    pub method: Method,
    pub channel: ChannelArg,
    pub beta: f64,
    #[serde(rename = "K")]
    pub k: Vec<f64>,
    pub j_mix: f64,
    pub sqrt_j: f64,
    pub h2_norm: f64,
    pub hinf_norm: f64,
    pub outcome: Option<Outcome>,
    pub iterations: usize,
    pub time_s: f64,
    pub diagnostic: Option<String>,
}

impl SolveReport {
    pub fn policy(&self) -> Result<Policy> {
        Ok(Policy {
            k: to_matrix("K", &self.k, self.instance.m, self.instance.n)?,
        })
    }

    /// Rebuilds the problem from the embedded instance and evaluates the
    /// reported policy again.
    pub fn reevaluate(&self) -> Result<f64> {
        let problem = self.instance.to_problem()?;
        let policy = self.policy()?;
        channel_cost(&problem, &policy, self.channel)
    }
}

fn channel_cost(problem: &MixedProblem, policy: &Policy, channel: ChannelArg) -> Result<f64> {
    if !problem.beta().is_finite() {
        return Ok(h2_norm(problem, policy)?.powi(2));
    }
    match channel {
        ChannelArg::One => eval_cost_1ch(problem, policy).map(|(j, _)| j),
        ChannelArg::Two => eval_cost_2ch(problem, policy).map(|(j, _)| j),
    }
}

fn lqr_limit(problem: &MixedProblem) -> Result<Policy> {
    Ok(solve_lqr(problem.a(), problem.b(), problem.q2(), problem.r2(), problem.w())?.policy)
}

/// `solve`: runs one method and reports the Table-1 style metrics.
pub fn cmd_solve(
    path: &Path,
    method: Method,
    channel: Option<ChannelArg>,
    opts: &SolveOptions,
    flags: &GlobalFlags,
) -> Result<CmdOutput> {
    let mut file = read_instance(path)?;
    if let Some(beta) = flags.beta {
        file.beta = beta;
    }
    let channel = channel.unwrap_or(if file.is_single_channel() {
        ChannelArg::One
    } else {
        ChannelArg::Two
    });
    let mut problem = file.to_problem()?;
    if channel == ChannelArg::One && !problem.is_single_channel() {
        problem = problem.to_single_channel();
    }
    if flags.check_assumptions && problem.beta().is_finite() {
        problem.check_beta_assumption()?;
    }
    let mut opts = opts.clone();
    if let Some(t) = flags.tol {
        opts.conv_tol = t;
    }
    if method == Method::Are && channel != ChannelArg::One {
        return Err(Error::Parse {
            field: "--method".into(),
            detail: "the analytic (are) method needs --channel one".into(),
        });
    }
    let start = Instant::now();
    let (policy, trace) = if !problem.beta().is_finite() {
        (lqr_limit(&problem)?, None)
    } else {
        match method {
            Method::Are => (solve_analytic_1ch(&problem)?.0, None),
            Method::Pi | Method::Gd => {
                // The single-channel base gain already is the optimum, so
                // single-channel runs start from a perturbed sample.
                let k0 = match channel {
                    ChannelArg::One => sample_feasible_starts(&problem, 1, flags.seed)?
                        .pop()
                        .expect("one start requested"),
                    ChannelArg::Two => crate::optim::feasible_base(&problem)?,
                };
                let (k, t) = match (method, channel) {
                    (Method::Pi, ChannelArg::One) => policy_iteration_1ch(&problem, &k0, &opts)?,
                    (Method::Pi, ChannelArg::Two) => policy_iteration_2ch(&problem, &k0, &opts)?,
                    (_, ChannelArg::One) => gradient_descent(&problem, &k0, &opts, CostChannel::Single)?,
                    (_, ChannelArg::Two) => gradient_descent(&problem, &k0, &opts, CostChannel::Mixed)?,
                };
                (k, Some(t))
            }
        }
    };
    let time_s = start.elapsed().as_secs_f64();
    let j_mix = channel_cost(&problem, &policy, channel)?;
    let h2 = h2_norm(&problem, &policy)?;
    let hinf = policy_hinf_norm(&problem, &policy, 1e-9)?;
    let outcome = trace.as_ref().map(|t| t.outcome);
    let mut instance = InstanceFile::from_problem(&file.name, &problem);
    instance.semidefinite_qinf = file.semidefinite_qinf;
    let report = SolveReport {
        instance,
        method,
        channel,
        beta: problem.beta(),
        k: row_major(&policy.k),
        j_mix,
        sqrt_j: j_mix.max(0.0).sqrt(),
        h2_norm: h2,
        hinf_norm: hinf,
        outcome,
        iterations: trace.as_ref().map_or(0, |t| t.iterations()),
        time_s,
        diagnostic: trace.as_ref().and_then(|t| t.diagnostic.clone()),
    };
    let exit = match outcome {
        None | Some(Outcome::Converged) => EXIT_OK,
        Some(Outcome::LeftFeasibleSet) => EXIT_INFEASIBLE,
        Some(Outcome::Oscillating) | Some(Outcome::MaxIters) => EXIT_NO_CONVERGENCE,
    };
    let text = if flags.json {
        serde_json::to_string_pretty(&report).expect("report serializes")
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "instance   {}", report.instance.name);
        let _ = writeln!(
            s,
            "method     {:?} ({:?} channel), beta = {}",
            method, channel, report.beta
        );
        if let Some(o) = outcome {
            let _ = writeln!(s, "outcome    {o:?} after {} iterations", report.iterations);
        }
        if let Some(d) = &report.diagnostic {
            let _ = writeln!(s, "diagnostic {d}");
        }
        let _ = writeln!(s, "time       {:.4} s", time_s);
        let _ = writeln!(s, "sqrt(J)    {:.6}", report.sqrt_j);
        let _ = writeln!(s, "H2 norm    {:.6}", h2);
        let _ = writeln!(s, "Hinf norm  {:.6}", hinf);
        let _ = write!(s, "K          {:?}", report.k);
        s
    };
    Ok(CmdOutput { text, exit })
}

/// Two-dimensional policy slice `K = base + t1 D1 + t2 D2`.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: Matrix,
    pub d1: Matrix,
    pub d2: Matrix,
    pub t1: (f64, f64, usize),
    pub t2: (f64, f64, usize),
    pub channel: ChannelArg,
    /// Report the LQR cost and plain stability instead (`β = ∞`).
    pub lqr: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.t1.2 < 2 || self.t2.2 < 2 {
            return Err(Error::Parse {
                field: "grid".into(),
                detail: "grid counts must be at least 2".into(),
            });
        }
        if self.d1.amax() == 0.0 || self.d2.amax() == 0.0 {
            return Err(Error::Parse {
                field: "direction".into(),
                detail: "directions must be nonzero".into(),
            });
        }
        if self.base.shape() != self.d1.shape() || self.base.shape() != self.d2.shape() {
            return Err(Error::DimensionMismatch(
                "sweep base and directions differ in shape".into(),
            ));
        }
        Ok(())
    }

    fn grid(range: (f64, f64, usize)) -> Vec<f64> {
        let (lo, hi, count) = range;
        (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect()
    }
}

/// One row of the sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t1: f64,
    pub t2: f64,
    pub feasible: bool,
    pub j_mix: f64,
    pub hinf_norm: f64,
}

/// Evaluates a sweep grid in parallel; rows come back in grid order
/// (`t1` outer, `t2` inner).
pub fn sweep_rows(problem: &MixedProblem, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let single = match spec.channel {
        ChannelArg::One if !problem.is_single_channel() => Some(problem.to_single_channel()),
        _ => None,
    };
    let problem = single.as_ref().unwrap_or(problem);
    let t1s = SweepSpec::grid(spec.t1);
    let t2s = SweepSpec::grid(spec.t2);
    let points: Vec<(f64, f64)> = t1s.iter().flat_map(|&a| t2s.iter().map(move |&b| (a, b))).collect();
    points
        .par_iter()
        .map(|&(t1, t2)| {
            let policy = Policy {
                k: &spec.base + &spec.d1 * t1 + &spec.d2 * t2,
            };
            let hinf = policy_hinf_norm(problem, &policy, 1e-9)?;
            let (feasible, j) = if spec.lqr {
                match h2_norm(problem, &policy) {
                    Ok(h) => (true, h * h),
                    Err(Error::Unstable) => (false, f64::NAN),
                    Err(e) => return Err(e),
                }
            } else if is_feasible(problem, &policy)?.feasible {
                (true, channel_cost(problem, &policy, spec.channel)?)
            } else {
                (false, f64::NAN)
            };
            Ok(SweepRow {
                t1,
                t2,
                feasible,
                j_mix: j,
                hinf_norm: hinf,
            })
        })
        .collect()
}

pub const SWEEP_HEADER: &str = "t1,t2,feasible,j_mix,hinf_norm";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.t1, r.t2, r.feasible as u8, r.j_mix, r.hinf_norm);
    }
    s
}

/// `sweep`: writes the CSV to `out` or returns it as text.
pub fn cmd_sweep(path: &Path, spec: &SweepSpec, out: Option<&Path>, flags: &GlobalFlags) -> Result<CmdOutput> {
    let problem = load_instance(path, flags)?;
    let rows = sweep_rows(&problem, spec)?;
    let csv = sweep_csv(&rows);
    match out {
        Some(p) => {
            std::fs::write(p, &csv).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            Ok(CmdOutput::ok(format!("wrote {} rows to {}", rows.len(), p.display())))
        }
        None => Ok(CmdOutput::ok(csv.trim_end().to_string())),
    }
}

/// `betastar`: optimal robustness level.
pub fn cmd_betastar(path: &Path, flags: &GlobalFlags) -> Result<CmdOutput> {
    let problem = load_instance(
        path,
        &GlobalFlags {
            check_assumptions: false,
            ..flags.clone()
        },
    )?;
    let tol = flags.tol.unwrap_or(1e-6);
    let v = beta_star(&problem, tol)?;
    Ok(CmdOutput::ok(if flags.json {
        serde_json::json!({ "beta_star": v, "tol": tol }).to_string()
    } else {
        format!("beta* = {v:.8}")
    }))
}

/// `feasible`: membership of `K` in `K_β`. Exits 2 when infeasible.
pub fn cmd_feasible(path: &Path, k: &str, flags: &GlobalFlags) -> Result<CmdOutput> {
    let problem = load_instance(path, flags)?;
    let policy = parse_policy(k, problem.m(), problem.n())?;
    let f = is_feasible(&problem, &policy)?;
    let hinf = policy_hinf_norm(&problem, &policy, 1e-9)?;
    let text = if flags.json {
        serde_json::json!({
            "stable": f.stable,
            "feasible": f.feasible,
            "marginal": f.marginal,
            "hinf_norm": if hinf.is_finite() { serde_json::json!(hinf) } else { serde_json::Value::Null },
            "beta": problem.beta(),
        })
        .to_string()
    } else {
        format!(
            "stable {}, feasible {}, marginal {}, Hinf norm {hinf:.8} (beta = {})",
            f.stable,
            f.feasible,
            f.marginal,
            problem.beta()
        )
    };
    Ok(CmdOutput {
        text,
        exit: if f.feasible { EXIT_OK } else { EXIT_INFEASIBLE },
    })
}

/// `hinf-norm`: closed-loop H∞ norm of `K`. Exits 2 for unstable loops.
pub fn cmd_hinf_norm(path: &Path, k: &str, flags: &GlobalFlags) -> Result<CmdOutput> {
    let problem = load_instance(path, flags)?;
    let policy = parse_policy(k, problem.m(), problem.n())?;
    let tol = flags.tol.unwrap_or(1e-9);
    let v = policy_hinf_norm(&problem, &policy, tol)?;
    if !v.is_finite() {
        return Err(Error::Unstable);
    }
    Ok(CmdOutput::ok(if flags.json {
        serde_json::json!({ "hinf_norm": v, "tol": tol }).to_string()
    } else {
        format!("{v:.10}")
    }))
}

/// Random stabilizable instance: `A` shifted to spectral abscissa 0.5,
/// `W = I`, `Q₂ = Q∞ = I`, `R∞ = I`, `R₂ = R∞ / 4`, `β = 2 β*`.
pub fn generate_instance(n: usize, m: usize, seed: u64) -> Result<InstanceFile> {
    if n == 0 || m == 0 {
        return Err(Error::Parse {
            field: "n, m".into(),
            detail: "dimensions must be positive".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let g = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal)) / (n as f64).sqrt();
        let shift = spectral_abscissa(&g)? - 0.5;
        let a = g - Matrix::identity(n, n) * shift;
        let b = Matrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal)) / (m as f64).sqrt();
        let i_n = SymMatrix::identity(n);
        let rinf = SymMatrix::identity(m);
        let r2 = SymMatrix::symmetrize(Matrix::identity(m, m) * 0.25);
        let Ok(problem) = MixedProblem::new(a, b, Matrix::identity(n, n), i_n.clone(), r2, i_n, rinf, 1.0) else {
            continue;
        };
        let bs = problem.beta_star()?;
        let beta = (2.0 * bs * 1e4).ceil() / 1e4;
        let problem = problem.with_beta(beta)?;
        return Ok(InstanceFile::from_problem(
            &format!("generated-n{n}-m{m}-seed{seed}"),
            &problem,
        ));
    }
    Err(Error::NonStabilizable)
}

/// `gen`: writes a generated instance.
pub fn cmd_gen(n: usize, m: usize, seed: u64, out: Option<&Path>) -> Result<CmdOutput> {
    let file = generate_instance(n, m, seed)?;
    let json = file.to_json();
    match out {
        Some(p) => {
            std::fs::write(p, &json).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            Ok(CmdOutput::ok(format!("wrote {} (beta = {})", p.display(), file.beta)))
        }
        None => Ok(CmdOutput::ok(json)),
    }
}

/// Verification-suite knobs.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Feasible policies sampled for the gradient and bound groups.
    pub samples: usize,
    pub ecl_samples: usize,
    pub multistart_starts: usize,
    /// Fault injection: perturbs the analytic gradient so the
    /// finite-difference group must fail.
    pub corrupt_gradient: bool,
}

impl VerifyOptions {
    /// Sample counts shrink with the state dimension so that the suite
    /// stays within a minute at `n = 60`.
    pub fn for_dimension(n: usize, seed: u64) -> Self {
        let (samples, ecl_samples, starts) = match n {
            0..=10 => (10, 500, 20),
            11..=30 => (4, 100, 4),
            _ => (2, 20, 2),
        };
        Self {
            seed,
            samples,
            ecl_samples,
            multistart_starts: starts,
            corrupt_gradient: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupResult {
    pub name: &'static str,
    pub checks: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl GroupResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub groups: Vec<GroupResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(GroupResult::passed)
    }
}

fn random_direction(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    let d = Matrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = d.norm();
    d / norm
}

fn group_gradients(
    problem: &MixedProblem,
    starts: &[Policy],
    opts: &VerifyOptions,
    rng: &mut ChaCha8Rng,
) -> Result<GroupResult> {
    let mut g = GroupResult::new("gradient-fd");
    let single = problem.is_single_channel();
    let (m, n) = (problem.m(), problem.n());
    // Full entrywise FD is affordable for small policies only.
    let directions = if m * n <= 36 { 0 } else { 3 };
    for k in starts {
        let mut grad = grad_2ch(problem, k)?;
        if opts.corrupt_gradient {
            grad[(0, 0)] += 1e-3 * (1.0 + grad.amax());
        }
        let dirs: Vec<Matrix> = if directions == 0 {
            (0..m * n)
                .map(|idx| {
                    let mut e = Matrix::zeros(m, n);
                    e[(idx / n, idx % n)] = 1.0;
                    e
                })
                .collect()
        } else {
            (0..directions).map(|_| random_direction(rng, m, n)).collect()
        };
        let mut num = 0.0;
        let mut den = 0.0;
        let mut failed = None;
        for d in &dirs {
            let step = 1e-6 * (1.0 + k.norm());
            match fd_directional(problem, k, d, step).or_else(|_| fd_directional(problem, k, d, step * 1e-2)) {
                Ok(fd) => {
                    let an = grad.dot(d);
                    num += (an - fd).powi(2);
                    den += fd.powi(2);
                }
                Err(e) => failed = Some(e.to_string()),
            }
        }
        let rel = num.sqrt() / den.sqrt().max(1e-12 * (1.0 + grad.norm()));
        g.check(failed.is_none() && rel <= 1e-5, || {
            format!(
                "K = {:?}: relative FD error {rel:.3e} {}",
                row_major(&k.k),
                failed.clone().unwrap_or_default()
            )
        });
        if single {
            let g1 = grad_1ch(problem, k)?;
            let gap = (&g1 - &grad).norm() / (1.0 + grad.norm());
            let gap = if opts.corrupt_gradient {
                (&g1 - grad_2ch(problem, k)?).norm() / (1.0 + grad.norm())
            } else {
                gap
            };
            g.check(gap <= 1e-7, || format!("single-channel formulas disagree by {gap:.3e}"));
        }
    }
    Ok(g)
}

fn group_bounds(problem: &MixedProblem, starts: &[Policy]) -> Result<GroupResult> {
    let mut g = GroupResult::new("upper-bound-chain");
    for k in starts {
        let (j, x) = eval_cost_2ch(problem, k)?;
        let a_k = problem.closed_loop(k);
        let xh = solve_lyapunov(&a_k, problem.w())?;
        let gap = SymMatrix::symmetrize(x.as_matrix() - xh.as_matrix()).min_eigenvalue();
        let h2 = h2_norm(problem, k)?;
        g.check(gap >= -1e-9 * (1.0 + x.amax()), || {
            format!("X_K - X̂_K has eigenvalue {gap:.3e}")
        });
        g.check(j >= h2 * h2 * (1.0 - 1e-12), || {
            format!("J_mix {j} below H2^2 {}", h2 * h2)
        });
    }
    Ok(g)
}

fn group_ecl(
    problem: &MixedProblem,
    starts: &[Policy],
    opts: &VerifyOptions,
    rng: &mut ChaCha8Rng,
) -> Result<GroupResult> {
    let mut g = GroupResult::new("ecl-equivalence");
    let tol = ecl::default_tol(problem);
    let (m, n) = (problem.m(), problem.n());
    let mut members = Vec::new();
    for k in starts {
        let (ok, point) = ecl::certify_nondegenerate(problem, k)?;
        g.check(ok, || format!("no lifting witness for K = {:?}", row_major(&k.k)));
        members.push(point);
    }
    for i in 0..opts.ecl_samples {
        let base = &members[i % members.len()];
        // Log-spaced perturbation magnitudes in [1e-6, 1].
        let mag = 10f64.powf(-6.0 * rng.random::<f64>());
        let mut p = base.clone();
        match i % 3 {
            0 => p.gamma -= mag * (1.0 + base.gamma.abs()),
            1 => p.k += random_direction(rng, m, n) * (mag * (1.0 + base.k.norm())),
            _ => {
                let d = random_direction(rng, n, n);
                let d = SymMatrix::symmetrize(&d + d.transpose());
                let cand = SymMatrix::symmetrize(base.x.as_matrix() + d.as_matrix() * (mag * base.x.amax()));
                if cand.min_eigenvalue() > 1e-8 * cand.amax() {
                    p.x = cand;
                }
                if rng.random::<bool>() {
                    p.gamma += mag * (1.0 + base.gamma.abs());
                }
            }
        }
        let lifted = ecl::member_lifted(problem, &p, tol)?;
        let q = ecl::phi(&p);
        let cvx = ecl::member_cvx(problem, &q, tol)?;
        g.check(lifted.member == cvx.member, || {
            format!(
                "membership mismatch (lifted {}, convex {}, margins {:.3e}/{:.3e})",
                lifted.member, cvx.member, lifted.max_eig, cvx.max_eig
            )
        });
        let back = ecl::psi(&q)?;
        let err = (&back.k - &p.k).amax() / (1.0 + p.k.amax());
        g.check(err <= 1e-12 || (err <= 1e-10 && n > 10), || {
            format!("round trip error {err:.3e}")
        });
    }
    Ok(g)
}

fn group_roundtrip(problem: &MixedProblem, starts: &[Policy]) -> Result<GroupResult> {
    let mut g = GroupResult::new("serialization");
    let file = InstanceFile::from_problem("verify", problem);
    let back = InstanceFile::parse(&file.to_json())?;
    g.check(back == file, || "instance file does not round trip".into());
    let reloaded = back.to_problem()?;
    for k in starts {
        let (j, _) = eval_cost_2ch(problem, k)?;
        let text = serde_json::to_string(&row_major(&k.k)).expect("serializes");
        let v: Vec<f64> = serde_json::from_str(&text).map_err(|e| Error::Parse {
            field: "K".into(),
            detail: e.to_string(),
        })?;
        let k2 = Policy {
            k: Matrix::from_row_slice(k.k.nrows(), k.k.ncols(), &v),
        };
        let (j2, _) = eval_cost_2ch(&reloaded, &k2)?;
        g.check((j - j2).abs() <= 1e-10 * (1.0 + j.abs()), || {
            format!("reloaded cost {j2} differs from {j}")
        });
    }
    Ok(g)
}

fn group_multistart(problem: &MixedProblem, opts: &VerifyOptions) -> Result<GroupResult> {
    let mut g = GroupResult::new("multistart");
    let single = problem.is_single_channel();
    let channel = if single {
        CostChannel::Single
    } else {
        CostChannel::Mixed
    };
    let solve_opts = SolveOptions {
        max_iters: 3000,
        trace_hinf: false,
        ..SolveOptions::default()
    };
    let report = multistart_global_check(problem, opts.multistart_starts, opts.seed, channel, &solve_opts)?;
    let bound = if single { 1e-4 } else { 1e-3 };
    if report.converged == 0 {
        g.check(false, || "no multistart run converged".into());
    } else {
        g.check(report.max_relative_gap <= bound, || {
            format!(
                "converged costs spread by {:.3e} (bound {bound:e})",
                report.max_relative_gap
            )
        });
    }
    if single && report.converged > 0 {
        let (k_star, _) = solve_analytic_1ch(problem)?;
        for run in report.runs.iter().filter(|r| r.outcome == Outcome::Converged) {
            let d = (&run.policy.k - &k_star.k).norm() / (1.0 + k_star.norm());
            g.check(d <= 1e-3, || {
                format!("converged policy {d:.3e} away from the analytic optimum")
            });
        }
    }
    Ok(g)
}

/// Runs the invariant suite on one problem. Deterministic in `opts.seed`.
pub fn verify_problem(problem: &MixedProblem, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts = sample_feasible_starts(problem, opts.samples, opts.seed)?;
    let groups = vec![
        group_gradients(problem, &starts, opts, &mut rng)?,
        group_bounds(problem, &starts)?,
        group_ecl(problem, &starts, opts, &mut rng)?,
        group_roundtrip(problem, &starts)?,
        group_multistart(problem, opts)?,
    ];
    Ok(VerifyReport { groups })
}

pub fn format_verify(report: &VerifyReport, json: bool) -> String {
    if json {
        return serde_json::to_string_pretty(report).expect("report serializes");
    }
    let mut s = String::new();
    for g in &report.groups {
        let _ = writeln!(
            s,
            "{:<18} {} ({} checks, {} failures)",
            g.name,
            if g.passed() { "PASS" } else { "FAIL" },
            g.checks,
            g.failures
        );
        if let Some(f) = &g.first_failure {
            let _ = writeln!(s, "  first counterexample: {f}");
        }
    }
    let _ = write!(
        s,
        "{}",
        if report.passed() {
            "all groups passed"
        } else {
            "verification FAILED"
        }
    );
    s
}

/// `verify`: zero exit iff every property group passes.
pub fn cmd_verify(path: &Path, flags: &GlobalFlags, corrupt_gradient: bool) -> Result<CmdOutput> {
    let problem = load_instance(path, flags)?;
    let mut opts = VerifyOptions::for_dimension(problem.n(), flags.seed);
    opts.corrupt_gradient = corrupt_gradient;
    let report = verify_problem(&problem, &opts)?;
    Ok(CmdOutput {
        text: format_verify(&report, flags.json),
        exit: if report.passed() { EXIT_OK } else { EXIT_INFEASIBLE },
    })
}

/// Runs `f` on a rayon pool capped by `MIXSYN_THREADS` when set.
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("MIXSYN_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
