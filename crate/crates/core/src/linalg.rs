//! Dense real-matrix kernel: spectra, stability tests, Schur reordering and
//! Lyapunov solves.
//!
//! Eigenvalues come from the LAPACK real Schur decomposition. The Lyapunov solver
//! is a complex Bartels-Stewart scheme on the triangular Schur factor, with
//! one step of iterative refinement.

use std::ops::Deref;

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Real symmetric matrix, stored symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Validates squareness, finiteness and symmetry to `1e-12 (1 + max|M|)`.
    pub fn new(m: Matrix) -> Result<Self> {
        ensure_square(&m)?;
        ensure_finite(&m, "symmetric matrix")?;
        let scale = 1.0 + m.amax();
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::DimensionMismatch(format!(
                "matrix is not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        Ok(Self::symmetrize(m))
    }

    /// Returns `(M + Mᵀ)/2` without checking how asymmetric `M` was.
    pub fn symmetrize(m: Matrix) -> Self {
        let t = m.transpose();
        SymMatrix((m + t) * 0.5)
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(Matrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Symmetric PSD square root. Eigenvalues down to `-1e-12 (1 + max|λ|)`
    /// are clipped to zero; anything more negative is an error.
    pub fn psd_sqrt(&self) -> Result<SymMatrix> {
        let eig = SymmetricEigen::new(self.0.clone());
        let scale = 1.0 + eig.eigenvalues.amax();
        let mut roots = eig.eigenvalues.clone();
        for v in roots.iter_mut() {
            if *v < -1e-12 * scale {
                return Err(Error::Assumption {
                    assumption: "positive semidefiniteness",
                    detail: format!("eigenvalue {v:.3e} is negative"),
                });
            }
            *v = v.max(0.0).sqrt();
        }
        let v = &eig.eigenvectors;
        Ok(SymMatrix::symmetrize(v * Matrix::from_diagonal(&roots) * v.transpose()))
    }
}

impl Deref for SymMatrix {
    type Target = Matrix;
    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl From<SymMatrix> for Matrix {
    fn from(s: SymMatrix) -> Matrix {
        s.0
    }
}

pub fn ensure_square(m: &Matrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_same_dim(a: &Matrix, b: &Matrix, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{what}: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Real Schur factors `(q, t)` of `m`, with `m = q t qᵀ`, from LAPACK.
fn real_schur(m: &Matrix) -> Result<(Matrix, Matrix)> {
    nalgebra_lapack::Schur::try_new(m.clone())
        .map(|s| s.unpack())
        .ok_or(Error::EigenFailure)
}

/// Eigenvalues of a real quasi-triangular Schur factor.
fn quasi_triangular_eigenvalues(t: &Matrix) -> Vec<C64> {
    let n = t.nrows();
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        if k + 1 < n && t[(k + 1, k)] != 0.0 {
            let (a, b, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
            let half = 0.5 * (a + d);
            let disc = C64::new(0.25 * (a - d) * (a - d) + b * c, 0.0).sqrt();
            out.push(C64::new(half, 0.0) + disc);
            out.push(C64::new(half, 0.0) - disc);
            k += 2;
        } else {
            out.push(C64::new(t[(k, k)], 0.0));
            k += 1;
        }
    }
    out
}

/// All eigenvalues of a square real matrix.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<C64>> {
    ensure_square(m)?;
    ensure_finite(m, "eigenvalue input")?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = real_schur(m)?;
    Ok(quasi_triangular_eigenvalues(&t))
}

/// Maximum real part over the eigenvalues of `m`.
pub fn spectral_abscissa(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// `true` iff every eigenvalue has real part below `-margin`.
pub fn is_hurwitz(m: &Matrix, margin: f64) -> Result<bool> {
    Ok(spectral_abscissa(m)? < -margin)
}

/// Complex Schur factorization `m = q t qᴴ` with `t` upper triangular.
///
/// Computed from the real Schur form, whose double-shift sweep is more
/// reliable than the complex single-shift one. Each 2x2 block of conjugate
/// eigenvalues is then split by a complex rotation.
pub fn complex_schur(m: &Matrix) -> Result<(CMatrix, CMatrix)> {
    ensure_square(m)?;
    ensure_finite(m, "Schur input")?;
    let (q, t) = real_schur(m)?;
    let mut q = q.map(|x| C64::new(x, 0.0));
    let mut t = t.map(|x| C64::new(x, 0.0));
    let n = t.nrows();
    let zero = C64::new(0.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let sub = t[(k + 1, k)];
        if sub.norm() <= f64::EPSILON * (t[(k, k)].norm() + t[(k + 1, k + 1)].norm()) {
            t[(k + 1, k)] = zero;
            k += 1;
            continue;
        }
        // Eigenvalue of the block and a unit eigenvector (v1, v2).
        let (a, b, c, d) = (t[(k, k)], t[(k, k + 1)], sub, t[(k + 1, k + 1)]);
        let half = (a + d) * 0.5;
        let disc = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
        let lambda = half + disc;
        let (v1, v2) = if (lambda - d).norm() >= (lambda - a).norm() {
            (lambda - d, c)
        } else {
            (b, lambda - a)
        };
        let nv = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
        let (cs, sn) = (v1 / nv, v2 / nv);
        // G = [[cs, -conj(sn)], [sn, conj(cs)]] has the eigenvector as its
        // first column; apply t <- Gᴴ t G and q <- q G.
        for j in 0..n {
            let (x, y) = (t[(k, j)], t[(k + 1, j)]);
            t[(k, j)] = cs.conj() * x + sn.conj() * y;
            t[(k + 1, j)] = -sn * x + cs * y;
        }
        for i in 0..n {
            let (x, y) = (t[(i, k)], t[(i, k + 1)]);
            t[(i, k)] = x * cs + y * sn;
            t[(i, k + 1)] = -x * sn.conj() + y * cs.conj();
            let (x, y) = (q[(i, k)], q[(i, k + 1)]);
            q[(i, k)] = x * cs + y * sn;
            q[(i, k + 1)] = -x * sn.conj() + y * cs.conj();
        }
        t[(k + 1, k)] = zero;
        k += 2;
    }
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = zero;
        }
    }
    Ok((q, t))
}

/// Swaps diagonal entries `k` and `k+1` of the triangular factor with a
/// Givens rotation, updating `q` so that `q t qᴴ` is unchanged.
fn swap_adjacent(q: &mut CMatrix, t: &mut CMatrix, k: usize) {
    let n = t.nrows();
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let x = t[(k, k + 1)];
    let d = b - a;
    let nv = (x.norm_sqr() + d.norm_sqr()).sqrt();
    if nv == 0.0 {
        return;
    }
    // first column of the rotation: eigenvector of the 2x2 block for `b`
    let v1 = x / nv;
    let v2 = d / nv;
    for c in k..n {
        let r0 = t[(k, c)];
        let r1 = t[(k + 1, c)];
        t[(k, c)] = v1.conj() * r0 + v2.conj() * r1;
        t[(k + 1, c)] = -v2 * r0 + v1 * r1;
    }
    for r in 0..=(k + 1) {
        let c0 = t[(r, k)];
        let c1 = t[(r, k + 1)];
        t[(r, k)] = c0 * v1 + c1 * v2;
        t[(r, k + 1)] = -c0 * v2.conj() + c1 * v1.conj();
    }
    for r in 0..n {
        let c0 = q[(r, k)];
        let c1 = q[(r, k + 1)];
        q[(r, k)] = c0 * v1 + c1 * v2;
        q[(r, k + 1)] = -c0 * v2.conj() + c1 * v1.conj();
    }
    t[(k + 1, k)] = C64::new(0.0, 0.0);
}

/// Moves the diagonal positions flagged in `selected` to the top-left of the
/// triangular factor, preserving relative order. Returns the selected count.
pub fn reorder_schur(q: &mut CMatrix, t: &mut CMatrix, selected: &[bool]) -> usize {
    let n = t.nrows();
    assert_eq!(selected.len(), n);
    let mut slot = 0;
    for (i, &sel) in selected.iter().enumerate() {
        if sel {
            let mut pos = i;
            while pos > slot {
                swap_adjacent(q, t, pos - 1);
                pos -= 1;
            }
            slot += 1;
        }
    }
    slot
}

/// Reusable Schur factors for repeated solves of `M X + X Mᵀ + C = 0`.
pub struct LyapunovSolver {
    q: CMatrix,
    t: CMatrix,
    m: Matrix,
}

impl LyapunovSolver {
    pub fn new(m: &Matrix) -> Result<Self> {
        ensure_square(m)?;
        let (q, t) = complex_schur(m)?;
        let abscissa = t.diagonal().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if !(abscissa < 0.0) {
            return Err(Error::UnstableCoefficient);
        }
        Ok(Self { q, t, m: m.clone() })
    }

    fn solve_once(&self, c: &Matrix) -> Result<Matrix> {
        let n = self.t.nrows();
        let cc = c.map(|x| C64::new(x, 0.0));
        let f = -(self.q.adjoint() * cc * &self.q);
        let t = &self.t;
        let mut y = CMatrix::zeros(n, n);
        for j in (0..n).rev() {
            let mut rhs = f.column(j).clone_owned();
            for k in (j + 1)..n {
                let coef = t[(j, k)].conj();
                if coef != C64::new(0.0, 0.0) {
                    rhs -= y.column(k) * coef;
                }
            }
            let shift = t[(j, j)].conj();
            for i in (0..n).rev() {
                let mut s = rhs[i];
                for l in (i + 1)..n {
                    s -= t[(i, l)] * y[(l, j)];
                }
                let piv = t[(i, i)] + shift;
                if piv.norm() == 0.0 {
                    return Err(Error::UnstableCoefficient);
                }
                y[(i, j)] = s / piv;
            }
        }
        let x = &self.q * y * self.q.adjoint();
        Ok(x.map(|z| z.re))
    }

    /// Solves `M X + X Mᵀ + C = 0`.
    pub fn solve(&self, c: &Matrix) -> Result<SymMatrix> {
        ensure_same_dim(&self.m, c, "Lyapunov right-hand side")?;
        let mut x = SymMatrix::symmetrize(self.solve_once(c)?).into_inner();
        let resid = lyapunov_residual_matrix(&self.m, &x, c);
        let corr = self.solve_once(&resid)?;
        x += corr;
        Ok(SymMatrix::symmetrize(x))
    }
}

fn lyapunov_residual_matrix(m: &Matrix, x: &Matrix, c: &Matrix) -> Matrix {
    m * x + x * m.transpose() + c
}

/// Frobenius norm of `M X + X Mᵀ + C`.
pub fn lyapunov_residual(m: &Matrix, x: &Matrix, c: &Matrix) -> f64 {
    lyapunov_residual_matrix(m, x, c).norm()
}

/// Solves `M X + X Mᵀ + C = 0` for Hurwitz `M`.
pub fn solve_lyapunov(m: &Matrix, c: &Matrix) -> Result<SymMatrix> {
    ensure_square(m)?;
    ensure_same_dim(m, c, "Lyapunov right-hand side")?;
    LyapunovSolver::new(m)?.solve(c)
}

/// Solves `Mᵀ Γ + Γ M + C = 0` for Hurwitz `M`.
pub fn solve_lyapunov_transposed(m: &Matrix, c: &Matrix) -> Result<SymMatrix> {
    solve_lyapunov(&m.transpose(), c)
}

/// Largest eigenvalue of the symmetric part of `m`.
pub fn sym_max_eigenvalue(m: &Matrix) -> f64 {
    SymMatrix::symmetrize(m.clone()).max_eigenvalue()
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn sym_min_eigenvalue(m: &Matrix) -> f64 {
    SymMatrix::symmetrize(m.clone()).min_eigenvalue()
}
