//! Conversions between matrix representations of linear maps on `2^n x 2^n`
//! operators. None of these assume complete positivity or trace
//! preservation, so they are shared by channels and generators.
//!
//! Conventions (d = 2^n, N = 4^n):
//! - row-major vectorization `vec(M)[r d + c] = M[r, c]`, so the
//!   superoperator of `ρ ↦ A ρ B` is `A ⊗ Bᵀ`;
//! - transfer matrix `T_ab = d⁻¹ tr[P_a E(P_b)]`;
//! - Choi matrix `Λ = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` (trace d for TP maps);
//! - Pauli-basis matrix `p` with `E(ρ) = Σ_ab p_ab P_a ρ P_b`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, RMatrix, ZERO};
use crate::pauli::PauliWord;

type Columns = Vec<Vec<(usize, Complex64)>>;

/// Sparse columns of the Pauli basis: `vec(P_a)` or `vec(P_aᵀ)`.
fn pauli_columns(n: usize, transposed: bool) -> Columns {
    let d = 1usize << n;
    (0..d * d)
        .map(|a| {
            PauliWord::from_index(n, a)
                .expect("index in range")
                .entries()
                .into_iter()
                .map(|(r, c, v)| (if transposed { c * d + r } else { r * d + c }, v))
                .collect()
        })
        .collect()
}

/// `out_ab = Σ conj(u_a[i]) m[i, j] u_b[j]`.
fn sandwich_to_basis(cols: &Columns, m: &CMatrix) -> CMatrix {
    let big = m.nrows();
    let count = cols.len();
    let mut mb = CMatrix::from_element(big, count, ZERO);
    for (b, col) in cols.iter().enumerate() {
        for &(j, v) in col {
            for i in 0..big {
                mb[(i, b)] += m[(i, j)] * v;
            }
        }
    }
    let mut out = CMatrix::from_element(count, count, ZERO);
    for (a, col) in cols.iter().enumerate() {
        for &(i, u) in col {
            let uc = u.conj();
            for b in 0..count {
                out[(a, b)] += uc * mb[(i, b)];
            }
        }
    }
    out
}

/// `out = Σ_ab m_ab u_a u_b†`.
fn basis_to_sandwich(cols: &Columns, m: &CMatrix, big: usize) -> CMatrix {
    let count = cols.len();
    let mut w = CMatrix::from_element(count, big, ZERO);
    for (b, col) in cols.iter().enumerate() {
        for &(j, v) in col {
            let vc = v.conj();
            for a in 0..count {
                w[(a, j)] += m[(a, b)] * vc;
            }
        }
    }
    let mut out = CMatrix::from_element(big, big, ZERO);
    for (a, col) in cols.iter().enumerate() {
        for &(i, u) in col {
            for j in 0..big {
                out[(i, j)] += u * w[(a, j)];
            }
        }
    }
    out
}

pub(crate) fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::Shape(format!("dimension {dim} is not 2^n with n >= 1")));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn check_square(m: &CMatrix, dim: usize, what: &str) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Shape(format!(
            "{what}: expected {dim}x{dim}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Superoperator `Σ K ⊗ conj(K)` of a Kraus set.
pub fn superop_from_kraus(kraus: &[CMatrix]) -> Result<CMatrix> {
    let first = kraus.first().ok_or_else(|| Error::Shape("empty Kraus set".into()))?;
    let d = first.nrows();
    qubits_for_dim(d)?;
    let mut s = CMatrix::from_element(d * d, d * d, ZERO);
    for k in kraus {
        check_square(k, d, "Kraus operator")?;
        s += k.kronecker(&k.map(|z| z.conj()));
    }
    Ok(s)
}

/// Complex transfer matrix `d⁻¹ U† S U` of a superoperator.
pub fn transfer_from_superop_complex(n: usize, s: &CMatrix) -> Result<CMatrix> {
    let d = 1usize << n;
    check_square(s, d * d, "superoperator")?;
    let t = sandwich_to_basis(&pauli_columns(n, false), s);
    Ok(t / Complex64::new(d as f64, 0.0))
}

pub fn superop_from_transfer(n: usize, t: &RMatrix) -> Result<CMatrix> {
    let d = 1usize << n;
    if t.nrows() != d * d || t.ncols() != d * d {
        return Err(Error::Shape(format!("transfer matrix must be {0}x{0}", d * d)));
    }
    let tc = t.map(|x| Complex64::new(x, 0.0));
    let s = basis_to_sandwich(&pauli_columns(n, false), &tc, d * d);
    Ok(s / Complex64::new(d as f64, 0.0))
}

/// Reshuffles a superoperator into the Choi matrix:
/// `Λ[i d + r, j d + c] = S[r d + c, i d + j]`.
pub fn choi_from_superop(n: usize, s: &CMatrix) -> CMatrix {
    let d = 1usize << n;
    let mut out = CMatrix::from_element(d * d, d * d, ZERO);
    for i in 0..d {
        for j in 0..d {
            for r in 0..d {
                for c in 0..d {
                    out[(i * d + r, j * d + c)] = s[(r * d + c, i * d + j)];
                }
            }
        }
    }
    out
}

/// Inverse of [`choi_from_superop`].
pub fn superop_from_choi(n: usize, choi: &CMatrix) -> CMatrix {
    let d = 1usize << n;
    let mut out = CMatrix::from_element(d * d, d * d, ZERO);
    for i in 0..d {
        for j in 0..d {
            for r in 0..d {
                for c in 0..d {
                    out[(r * d + c, i * d + j)] = choi[(i * d + r, j * d + c)];
                }
            }
        }
    }
    out
}

pub fn choi_from_pauli_basis(n: usize, p: &CMatrix) -> Result<CMatrix> {
    let d = 1usize << n;
    check_square(p, d * d, "Pauli-basis matrix")?;
    Ok(basis_to_sandwich(&pauli_columns(n, true), p, d * d))
}

pub fn pauli_basis_from_choi(n: usize, choi: &CMatrix) -> Result<CMatrix> {
    let d = 1usize << n;
    check_square(choi, d * d, "Choi matrix")?;
    let p = sandwich_to_basis(&pauli_columns(n, true), choi);
    Ok(p / Complex64::new((d * d) as f64, 0.0))
}

/// Pauli-basis matrix of an arbitrary linear map given by its transfer matrix.
pub fn pauli_basis_from_transfer(n: usize, t: &RMatrix) -> Result<CMatrix> {
    let s = superop_from_transfer(n, t)?;
    pauli_basis_from_choi(n, &choi_from_superop(n, &s))
}

/// Complex transfer matrix of the map `ρ ↦ Σ_ab p_ab P_a ρ P_b`.
pub fn transfer_from_pauli_basis_complex(n: usize, p: &CMatrix) -> Result<CMatrix> {
    let choi = choi_from_pauli_basis(n, p)?;
    transfer_from_superop_complex(n, &superop_from_choi(n, &choi))
}
