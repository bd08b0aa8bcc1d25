//! Dense linear-algebra helpers shared by the channel and generator code.
//!
//! Everything here works on `nalgebra` dynamic matrices. Matrix exponentials
//! come from `nalgebra`; the principal logarithm is computed by inverse
//! scaling and squaring (Denman-Beavers square roots followed by a Gregory
//! series), which is accurate as long as no eigenvalue lies on the closed
//! negative real axis.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Largest absolute imaginary part of any entry.
pub fn max_imag(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &RMatrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Real part of `m`, rejecting imaginary residue above `tol`.
pub fn real_part_checked(m: &CMatrix, tol: f64) -> Result<RMatrix> {
    let residue = max_imag(m);
    if residue > tol {
        return Err(Error::NotHermiticityPreserving { residue });
    }
    Ok(m.map(|z| z.re))
}

/// `max |m - m†|`.
pub fn hermitian_residue(m: &CMatrix) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

/// Eigenvalues of a Hermitian matrix in ascending order. Only the Hermitian
/// part of `m` is used.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigen-decomposition of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h)
}

/// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Matrix exponential of a real square matrix.
pub fn expm(m: &RMatrix) -> RMatrix {
    m.exp()
}

fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn sqrtm_denman_beavers(a: &CMatrix) -> Result<CMatrix> {
    let dim = a.nrows();
    let mut y = a.clone();
    let mut z = CMatrix::identity(dim, dim);
    let half = Complex64::new(0.5, 0.0);
    let mut prev_delta = f64::INFINITY;
    for _ in 0..100 {
        let y_inv = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::PrincipalBranchUnavailable("singular square-root iterate".into()))?;
        let z_inv = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::PrincipalBranchUnavailable("singular square-root iterate".into()))?;
        let y_next = (&y + z_inv) * half;
        let z_next = (&z + y_inv) * half;
        let delta = norm1(&(&y_next - &y));
        y = y_next;
        z = z_next;
        let scale = norm1(&y).max(1.0);
        // quadratic convergence stalls at roundoff: stop once the step stops shrinking
        if delta <= 1e-15 * scale || (delta <= 1e-9 * scale && delta >= 0.5 * prev_delta) {
            return Ok(y);
        }
        prev_delta = delta;
    }
    Err(Error::PrincipalBranchUnavailable("square-root iteration did not converge".into()))
}

/// Principal matrix logarithm.
///
/// The caller is responsible for rejecting spectra that touch the closed
/// negative real axis; see [`principal_log_available`].
pub fn logm(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Shape("logm needs a square matrix".into()));
    }
    let dim = a.nrows();
    let id = CMatrix::identity(dim, dim);
    let mut x = a.clone();
    let mut squarings = 0u32;
    while norm1(&(&x - &id)) > 0.25 {
        x = sqrtm_denman_beavers(&x)?;
        squarings += 1;
        if squarings > 64 {
            return Err(Error::PrincipalBranchUnavailable("too many square roots".into()));
        }
    }
    // log(x) = 2 atanh(z), z = (x - 1)(x + 1)^-1
    let denom_inv = (&x + &id)
        .try_inverse()
        .ok_or_else(|| Error::PrincipalBranchUnavailable("singular (x + 1)".into()))?;
    let z = (&x - &id) * denom_inv;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z;
    let mut j = 3.0;
    while j < 400.0 {
        term = &term * &z2;
        let t = &term * Complex64::new(1.0 / j, 0.0);
        let tn = norm1(&t);
        sum += t;
        if tn <= 1e-18 * norm1(&sum).max(1e-300) {
            break;
        }
        j += 2.0;
    }
    Ok(sum * Complex64::new(2.0 * 2f64.powi(squarings as i32), 0.0))
}

/// Eigenvalues of a real square matrix via a real Schur form with a bounded
/// number of QR sweeps.
pub fn complex_eigenvalues(m: &RMatrix) -> Result<Vec<Complex64>> {
    let max_iter = 100 * m.nrows().max(1);
    // Deflation at machine epsilon can stall on clustered spectra; retry
    // with looser thresholds, then with the complex single-shift iteration.
    for eps in [f64::EPSILON, 1e-14, 1e-12] {
        if let Some(schur) = nalgebra::linalg::Schur::try_new(m.clone(), eps, max_iter) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    to_complex(m)
        .try_schur(1e-12, max_iter)
        .and_then(|s| s.eigenvalues())
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::PrincipalBranchUnavailable("eigenvalue iteration did not converge".into()))
}

/// Checks that the real matrix `m` has a well-defined principal logarithm:
/// no eigenvalue with modulus below `zero_tol`, and none on the negative real
/// axis. Returns the complex spectrum on success.
pub fn principal_log_available(m: &RMatrix, zero_tol: f64) -> Result<Vec<Complex64>> {
    let ev = complex_eigenvalues(m)?;
    for mu in &ev {
        if mu.norm() <= zero_tol {
            return Err(Error::PrincipalBranchUnavailable(format!(
                "eigenvalue {mu} is (numerically) zero"
            )));
        }
        if mu.re < 0.0 && mu.im.abs() <= 1e-9 * mu.norm() {
            return Err(Error::PrincipalBranchUnavailable(format!(
                "eigenvalue {mu} lies on the negative real axis"
            )));
        }
    }
    Ok(ev)
}

/// Gauss-Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    assert!(order >= 1);
    let mut out = Vec::with_capacity(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let nf = order as f64;
    for i in 1..=order {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if order == 1 { x } else { p1 };
            let pn_1 = if order == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pn_1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((mid + half * x, half * w));
    }
    out
}
