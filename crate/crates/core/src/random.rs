//! Seeded random instances: Kraus sets, unitaries, states, PSD matrices.
//!
//! Used by the test suites and benchmarks; every generator takes an explicit
//! RNG so results are reproducible from a seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::CMatrix;

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-ish random unitary from the QR decomposition of a Ginibre matrix,
/// with the diagonal phases of R divided out.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let d = 1usize << n;
    let qr = gaussian_matrix(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random CPTP map with `count` Kraus operators: an isometry `V` from the
/// thin QR of a `(count d) x d` Gaussian matrix, cut into `d x d` blocks.
pub fn random_kraus<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<CMatrix> {
    let d = 1usize << n;
    let v = gaussian_matrix(count * d, d, rng).qr().q();
    (0..count).map(|k| v.rows(k * d, d).into_owned()).collect()
}

/// Random density matrix `G G† / tr(G G†)`.
pub fn random_density_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let d = 1usize << n;
    let g = gaussian_matrix(d, d, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Random positive semidefinite matrix `scale · G G† / dim`.
pub fn random_psd<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(dim, dim, rng);
    (&g * g.adjoint()) * Complex64::new(scale / dim as f64, 0.0)
}

/// Random Hermitian matrix with entries of size about `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(dim, dim, rng);
    (&g + g.adjoint()) * Complex64::new(0.5 * scale, 0.0)
}

/// Random probability vector of the given length (normalized exponentials).
pub fn random_distribution<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}
