//! Exact linear-algebra layer: the symplectic form, membership tests for
//! Sp(2n,R), the doubled-phase-space embedding, and the Gaussian
//! admissibility / Hardy eigenvalue tests.

use crate::error::{MoyalError, Result};
use nalgebra::{DMatrix, DVector};

/// Planck constant and degrees of freedom shared by every transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbarContext {
    pub hbar: f64,
    pub n: usize,
}

impl HbarContext {
    pub fn new(hbar: f64, n: usize) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(MoyalError::ParamOutOfRange(format!("hbar = {hbar}, must be > 0")));
        }
        if n == 0 {
            return Err(MoyalError::ParamOutOfRange("n must be >= 1".into()));
        }
        Ok(Self { hbar, n })
    }

    /// Default desk context: hbar = 1, one degree of freedom.
    pub fn desk() -> Self {
        Self { hbar: 1.0, n: 1 }
    }
}

/// A point z = (x, p) of phase space R^{2n}.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if x.len() != p.len() {
            return Err(MoyalError::DimensionMismatch(format!(
                "x has length {}, p has length {}",
                x.len(),
                p.len()
            )));
        }
        if x.iter().chain(p.iter()).any(|v| !v.is_finite()) {
            return Err(MoyalError::NonFinite("PhasePoint".into()));
        }
        Ok(Self { x, p })
    }

    pub fn of2(x: f64, p: f64) -> Self {
        Self { x: vec![x], p: vec![p] }
    }

    pub fn dof(&self) -> usize {
        self.x.len()
    }
}

/// sigma(z, z') = p . x' - p' . x
pub fn symplectic_form(z: &PhasePoint, z2: &PhasePoint) -> Result<f64> {
    if z.dof() != z2.dof() {
        return Err(MoyalError::DimensionMismatch(format!(
            "phase points with n = {} and n = {}",
            z.dof(),
            z2.dof()
        )));
    }
    let mut acc = 0.0;
    for i in 0..z.dof() {
        acc += z.p[i] * z2.x[i] - z2.p[i] * z.x[i];
    }
    Ok(acc)
}

/// The standard symplectic matrix J = [[0, I], [-I, 0]] on R^{2n}.
pub fn standard_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// True iff max-entry |S^T J S - J| <= tol.
pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> Result<bool> {
    if s.nrows() != s.ncols() {
        return Err(MoyalError::NonSquare { rows: s.nrows(), cols: s.ncols() });
    }
    if s.nrows() % 2 != 0 || s.nrows() == 0 {
        return Err(MoyalError::DimensionMismatch(format!(
            "symplectic candidate must be 2n x 2n, got {}",
            s.nrows()
        )));
    }
    let n = s.nrows() / 2;
    let j = standard_j(n);
    let r = s.transpose() * &j * s - &j;
    Ok(r.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= tol)
}

/// Doubled-phase-space embedding M_S = blockdiag(S^{-1}, S^T), symplectic for
/// the direct-sum form sigma (+) sigma.
pub fn embed_double_phase(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !is_symplectic(s, 1e-10)? {
        let n = s.nrows() / 2;
        let j = standard_j(n);
        let r = s.transpose() * &j * s - &j;
        return Err(MoyalError::NotSymplectic(r.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
    }
    let n2 = s.nrows();
    let sinv = s
        .clone()
        .try_inverse()
        .ok_or_else(|| MoyalError::NotSymplectic(f64::INFINITY))?;
    let mut m = DMatrix::zeros(2 * n2, 2 * n2);
    m.view_mut((0, 0), (n2, n2)).copy_from(&sinv);
    m.view_mut((n2, n2), (n2, n2)).copy_from(&s.transpose());
    Ok(m)
}

/// The symplectic form matrix of sigma (+) sigma on R^{4n}, i.e. the form for
/// which `embed_double_phase` outputs are symplectic.
pub fn double_phase_form(n: usize) -> DMatrix<f64> {
    let j = standard_j(n);
    let mut jj = DMatrix::zeros(4 * n, 4 * n);
    jj.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&j);
    jj.view_mut((2 * n, 2 * n), (2 * n, 2 * n)).copy_from(&j);
    jj
}

/// Max-entry residual |S^T F S - F| for a general bilinear form F.
pub fn form_residual(s: &DMatrix<f64>, form: &DMatrix<f64>) -> f64 {
    let r = s.transpose() * form * s - form;
    r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn check_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(MoyalError::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let dev = (m - m.transpose()).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if dev > tol {
        return Err(MoyalError::NonSymmetric(dev));
    }
    Ok(())
}

/// Sorted moduli of the eigenvalues of J M and the admissibility verdict
/// (all moduli <= 1 + 1e-12). M must be symmetric positive-definite.
pub fn gaussian_admissible(m: &DMatrix<f64>) -> Result<(Vec<f64>, bool)> {
    check_symmetric(m, 1e-12)?;
    if m.nrows() % 2 != 0 {
        return Err(MoyalError::DimensionMismatch(format!(
            "shape matrix must be 2n x 2n, got {}",
            m.nrows()
        )));
    }
    let sym = nalgebra::SymmetricEigen::new(m.clone());
    if let Some(min) = sym.eigenvalues.iter().cloned().reduce(f64::min) {
        if min <= 0.0 {
            return Err(MoyalError::NotPositiveDefinite(min));
        }
    }
    let n = m.nrows() / 2;
    let jm = standard_j(n) * m;
    // JM is not normal; take moduli from the general complex spectrum
    let eigs = jm.complex_eigenvalues();
    let mut moduli: Vec<f64> = eigs.iter().map(|c| c.norm()).collect();
    moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ok = moduli.last().map(|m| *m <= 1.0 + 1e-12).unwrap_or(true);
    Ok((moduli, ok))
}

/// Eigenvalues of A B (real and positive for symmetric positive-definite A, B)
/// and the verdict max <= 1 + 1e-12.
pub fn hardy_pair_check(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, bool)> {
    check_symmetric(a, 1e-12)?;
    check_symmetric(b, 1e-12)?;
    if a.nrows() != b.nrows() {
        return Err(MoyalError::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    for (name, m) in [("A", a), ("B", b)] {
        let sym = nalgebra::SymmetricEigen::new(m.clone());
        if let Some(min) = sym.eigenvalues.iter().cloned().reduce(f64::min) {
            if min <= 0.0 {
                return Err(MoyalError::ParamOutOfRange(format!(
                    "{name} must be positive definite (eigenvalue {min:.3e})"
                )));
            }
        }
    }
    // AB is similar to A^{1/2} B A^{1/2}, which is symmetric positive-definite
    let ea = nalgebra::SymmetricEigen::new(a.clone());
    let sqrt_vals: Vec<f64> = ea.eigenvalues.iter().map(|v| v.sqrt()).collect();
    let asqrt =
        &ea.eigenvectors * DMatrix::from_diagonal(&DVector::from_vec(sqrt_vals)) * ea.eigenvectors.transpose();
    let sym_prod = &asqrt * b * &asqrt;
    let es = nalgebra::SymmetricEigen::new(sym_prod);
    let mut eigs: Vec<f64> = es.eigenvalues.iter().cloned().collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let ok = eigs.last().map(|m| *m <= 1.0 + 1e-12).unwrap_or(true);
    Ok((eigs, ok))
}
