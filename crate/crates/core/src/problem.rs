//! Problem data for mixed H2/H∞ state feedback and the policy type.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, ensure_square, Matrix, SymMatrix};

/// Closed-loop state feedback `u = K x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub k: Matrix,
}

impl Policy {
    pub fn new(k: Matrix) -> Result<Self> {
        ensure_finite(&k, "policy")?;
        Ok(Self { k })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self { k: Matrix::zeros(m, n) }
    }

    /// `k · I` for square policies.
    pub fn scaled_identity(n: usize, k: f64) -> Self {
        Self {
            k: Matrix::identity(n, n) * k,
        }
    }

    pub fn norm(&self) -> f64 {
        self.k.norm()
    }
}

impl From<Matrix> for Policy {
    fn from(k: Matrix) -> Self {
        Self { k }
    }
}

/// Plant `ẋ = A x + B u + B_w w` with H2 output weights `(Q₂, R₂)`,
/// H∞ output weights `(Q∞, R∞)` and robustness level `β`.
#[derive(Debug, Clone)]
pub struct MixedProblem {
    a: Matrix,
    b: Matrix,
    bw: Matrix,
    q2: SymMatrix,
    r2: SymMatrix,
    qinf: SymMatrix,
    rinf: SymMatrix,
    beta: f64,
    w: SymMatrix,
    q2_sqrt: SymMatrix,
    r2_sqrt: SymMatrix,
    qinf_sqrt: SymMatrix,
    rinf_sqrt: SymMatrix,
    r2_inv: Matrix,
    rinf_inv: Matrix,
    beta_star: OnceLock<f64>,
}

fn require_pd(s: &SymMatrix, assumption: &'static str, name: &str) -> Result<()> {
    let ev = s.eigenvalues();
    let scale = 1.0 + ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min = ev.first().copied().unwrap_or(0.0);
    if min <= 1e-10 * scale {
        return Err(Error::Assumption {
            assumption,
            detail: format!("{name} not positive definite (min eigenvalue {min:.3e})"),
        });
    }
    Ok(())
}

fn require_sym_dim(s: &SymMatrix, n: usize, name: &str) -> Result<()> {
    if s.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "{name} is {0}x{0}, expected {n}x{n}",
            s.dim()
        )));
    }
    Ok(())
}

impl MixedProblem {
    /// Validates dimensions, finiteness, Assumption 2 definiteness and
    /// stabilizability of `(A, B)` (by computing an LQR gain).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: Matrix,
        b: Matrix,
        bw: Matrix,
        q2: SymMatrix,
        r2: SymMatrix,
        qinf: SymMatrix,
        rinf: SymMatrix,
        beta: f64,
    ) -> Result<Self> {
        Self::build(a, b, bw, q2, r2, qinf, rinf, beta, true)
    }

    /// Like [`MixedProblem::new`] but only asks for `Q∞ ⪰ 0`. Degenerate
    /// robustness weights such as the scalar single-channel instance with
    /// `Q = 0` need this; the boundary theory assumes `Q∞ ≻ 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn new_semidefinite_qinf(
        a: Matrix,
        b: Matrix,
        bw: Matrix,
        q2: SymMatrix,
        r2: SymMatrix,
        qinf: SymMatrix,
        rinf: SymMatrix,
        beta: f64,
    ) -> Result<Self> {
        Self::build(a, b, bw, q2, r2, qinf, rinf, beta, false)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        a: Matrix,
        b: Matrix,
        bw: Matrix,
        q2: SymMatrix,
        r2: SymMatrix,
        qinf: SymMatrix,
        rinf: SymMatrix,
        beta: f64,
        strict_qinf: bool,
    ) -> Result<Self> {
        let n = ensure_square(&a)?;
        ensure_finite(&a, "A")?;
        ensure_finite(&b, "B")?;
        ensure_finite(&bw, "B_w")?;
        if b.nrows() != n || bw.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "B and B_w need {n} rows (got {} and {})",
                b.nrows(),
                bw.nrows()
            )));
        }
        let m = b.ncols();
        require_sym_dim(&q2, n, "Q2")?;
        require_sym_dim(&qinf, n, "Qinf")?;
        require_sym_dim(&r2, m, "R2")?;
        require_sym_dim(&rinf, m, "Rinf")?;
        if !(beta > 0.0) {
            return Err(Error::Assumption {
                assumption: "Assumption 1",
                detail: format!("beta must be positive (got {beta})"),
            });
        }
        let w = SymMatrix::symmetrize(&bw * bw.transpose());
        require_pd(&w, "Assumption 2", "W")?;
        if strict_qinf {
            require_pd(&qinf, "Assumption 2", "Qinf")?;
        }
        require_pd(&r2, "Assumption 2", "R2")?;
        require_pd(&rinf, "Assumption 2", "Rinf")?;
        let q2_sqrt = q2.psd_sqrt().map_err(|_| Error::Assumption {
            assumption: "Assumption 2",
            detail: "Q2 not positive semidefinite".into(),
        })?;
        let r2_inv = r2.as_matrix().clone().try_inverse().ok_or(Error::Assumption {
            assumption: "Assumption 2",
            detail: "R2 singular".into(),
        })?;
        let rinf_inv = rinf.as_matrix().clone().try_inverse().ok_or(Error::Assumption {
            assumption: "Assumption 2",
            detail: "Rinf singular".into(),
        })?;
        let problem = Self {
            r2_sqrt: r2.psd_sqrt()?,
            qinf_sqrt: qinf.psd_sqrt().map_err(|_| Error::Assumption {
                assumption: "Assumption 2",
                detail: "Qinf not positive semidefinite".into(),
            })?,
            rinf_sqrt: rinf.psd_sqrt()?,
            q2_sqrt,
            r2_inv: SymMatrix::symmetrize(r2_inv).into_inner(),
            rinf_inv: SymMatrix::symmetrize(rinf_inv).into_inner(),
            a,
            b,
            bw,
            q2,
            r2,
            qinf,
            rinf,
            beta,
            w,
            beta_star: OnceLock::new(),
        };
        crate::optim::solve_lqr(
            &problem.a,
            &problem.b,
            &Matrix::identity(n, n),
            &problem.rinf,
            &problem.w,
        )
        .map_err(|_| Error::Assumption {
            assumption: "Assumption 1",
            detail: "(A, B) not stabilizable".into(),
        })?;
        Ok(problem)
    }

    /// Single-channel instance: `Q₂ = Q∞ = q`, `R₂ = R∞ = r`.
    pub fn single_channel(a: Matrix, b: Matrix, bw: Matrix, q: SymMatrix, r: SymMatrix, beta: f64) -> Result<Self> {
        Self::new(a, b, bw, q.clone(), r.clone(), q, r, beta)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.bw.ncols()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn bw(&self) -> &Matrix {
        &self.bw
    }

    pub fn w(&self) -> &SymMatrix {
        &self.w
    }

    pub fn q2(&self) -> &SymMatrix {
        &self.q2
    }

    pub fn r2(&self) -> &SymMatrix {
        &self.r2
    }

    pub fn qinf(&self) -> &SymMatrix {
        &self.qinf
    }

    pub fn rinf(&self) -> &SymMatrix {
        &self.rinf
    }

    pub fn q2_sqrt(&self) -> &SymMatrix {
        &self.q2_sqrt
    }

    pub fn r2_sqrt(&self) -> &SymMatrix {
        &self.r2_sqrt
    }

    pub fn qinf_sqrt(&self) -> &SymMatrix {
        &self.qinf_sqrt
    }

    pub fn rinf_sqrt(&self) -> &SymMatrix {
        &self.rinf_sqrt
    }

    pub fn r2_inv(&self) -> &Matrix {
        &self.r2_inv
    }

    pub fn rinf_inv(&self) -> &Matrix {
        &self.rinf_inv
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Same plant and weights at another robustness level. The cached β*
    /// carries over since it does not depend on β.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::Assumption {
                assumption: "Assumption 1",
                detail: format!("beta must be positive (got {beta})"),
            });
        }
        let mut p = self.clone();
        p.beta = beta;
        Ok(p)
    }

    /// Replaces the H2 weights by the H∞ weights.
    pub fn to_single_channel(&self) -> Self {
        let mut p = self.clone();
        p.q2 = self.qinf.clone();
        p.r2 = self.rinf.clone();
        p.q2_sqrt = self.qinf_sqrt.clone();
        p.r2_sqrt = self.rinf_sqrt.clone();
        p.r2_inv = self.rinf_inv.clone();
        p
    }

    pub fn is_single_channel(&self) -> bool {
        (self.q2.as_matrix() - self.qinf.as_matrix()).amax() <= 1e-12
            && (self.r2.as_matrix() - self.rinf.as_matrix()).amax() <= 1e-12
    }

    pub fn check_policy(&self, policy: &Policy) -> Result<()> {
        if policy.k.shape() != (self.m(), self.n()) {
            return Err(Error::DimensionMismatch(format!(
                "policy is {:?}, expected {:?}",
                policy.k.shape(),
                (self.m(), self.n())
            )));
        }
        Ok(())
    }

    /// `A + B K`.
    pub fn closed_loop(&self, policy: &Policy) -> Matrix {
        &self.a + &self.b * &policy.k
    }

    /// `S_K = Q∞ + Kᵀ R∞ K`.
    pub fn s_k(&self, policy: &Policy) -> Matrix {
        self.qinf.as_matrix() + policy.k.transpose() * self.rinf.as_matrix() * &policy.k
    }

    /// `Q₂ + Kᵀ R₂ K`.
    pub fn h2_weight(&self, policy: &Policy) -> Matrix {
        self.q2.as_matrix() + policy.k.transpose() * self.r2.as_matrix() * &policy.k
    }

    /// Infimum of the closed-loop H∞ norm over stabilizing gains (cached).
    pub fn beta_star(&self) -> Result<f64> {
        if let Some(v) = self.beta_star.get() {
            return Ok(*v);
        }
        let v = crate::hinf::beta_star(self, 1e-6)?;
        let _ = self.beta_star.set(v);
        Ok(v)
    }

    /// Assumption 1 robustness condition `β > β*`.
    pub fn check_beta_assumption(&self) -> Result<()> {
        let bs = self.beta_star()?;
        if self.beta <= bs {
            return Err(Error::Assumption {
                assumption: "Assumption 1",
                detail: format!("beta = {} is not above beta* = {bs:.6}", self.beta),
            });
        }
        Ok(())
    }
}
