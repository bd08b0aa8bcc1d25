//! Quantum channels in Kraus, Pauli-basis, transfer and Choi form, plus
//! composition, CPTP checks and Pauli twirling.
//!
//! A [`Channel`] always stores its real transfer matrix; the other
//! representations are derived on first use and cached. The type also holds
//! maps that are not completely positive (e.g. PL maps with negative
//! parameters); [`Channel::is_cptp`] reports on that.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};
use crate::pauli::{check_cap, sympl_index, walsh_hadamard_f_to_p, PauliVector, PauliWord, Probabilities};
use crate::superop;

/// Largest qubit count for `4^n x 4^n` matrices.
pub const MAX_TRANSFER_QUBITS: usize = 5;

/// Imaginary residue tolerated when reducing a transfer matrix to real form.
pub const IMAG_TOL: f64 = 1e-12;

/// Tolerances for [`Channel::is_cptp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Lower bound `-cp` on the normalized Choi spectrum.
    pub cp: f64,
    /// Allowed deviation of transfer row 0 from `(1, 0, ..., 0)`.
    pub tp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { cp: 1e-9, tp: 1e-10 }
    }
}

/// Representation tags, as used in the JSON channel format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReprKind {
    Kraus,
    PauliBasis,
    Transfer,
    Choi,
}

/// A channel in one concrete representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Kraus(Vec<CMatrix>),
    PauliBasis(CMatrix),
    Transfer(RMatrix),
    Choi(CMatrix),
}

impl Representation {
    pub fn kind(&self) -> ReprKind {
        match self {
            Representation::Kraus(_) => ReprKind::Kraus,
            Representation::PauliBasis(_) => ReprKind::PauliBasis,
            Representation::Transfer(_) => ReprKind::Transfer,
            Representation::Choi(_) => ReprKind::Choi,
        }
    }
}

/// Result of [`Channel::is_cptp`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CptpReport {
    pub is_cptp: bool,
    /// Smallest eigenvalue of the trace-normalized Choi matrix.
    pub min_choi_eigenvalue: f64,
    /// Largest `|T_0b - δ_0b|`.
    pub max_tp_deviation: f64,
    /// Column `b` where that deviation occurs.
    pub tp_offending_column: usize,
}

#[derive(Debug, Clone)]
pub struct Channel {
    n: usize,
    transfer: RMatrix,
    kraus: OnceLock<Vec<CMatrix>>,
    choi: OnceLock<CMatrix>,
    pauli_basis: OnceLock<CMatrix>,
}

impl PartialEq for Channel {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.transfer == other.transfer
    }
}

fn real_transfer(t: &CMatrix) -> Result<RMatrix> {
    let scale = linalg::max_abs(t).max(1.0);
    linalg::real_part_checked(t, IMAG_TOL * scale)
}

impl Channel {
    fn with_transfer(n: usize, transfer: RMatrix) -> Self {
        Self {
            n,
            transfer,
            kraus: OnceLock::new(),
            choi: OnceLock::new(),
            pauli_basis: OnceLock::new(),
        }
    }

    pub fn from_transfer(n: usize, transfer: RMatrix) -> Result<Self> {
        check_cap("transfer matrix", n, MAX_TRANSFER_QUBITS)?;
        let dim = 1usize << (2 * n);
        if transfer.nrows() != dim || transfer.ncols() != dim {
            return Err(Error::Shape(format!(
                "transfer matrix for n = {n} must be {dim}x{dim}, got {}x{}",
                transfer.nrows(),
                transfer.ncols()
            )));
        }
        Ok(Self::with_transfer(n, transfer))
    }

    /// Builds a channel from Kraus operators. Completeness is not enforced
    /// here; see [`Channel::is_cptp`].
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        let d = kraus.first().ok_or_else(|| Error::Shape("empty Kraus set".into()))?.nrows();
        let n = superop::qubits_for_dim(d)?;
        check_cap("transfer matrix", n, MAX_TRANSFER_QUBITS)?;
        let s = superop::superop_from_kraus(&kraus)?;
        let t = real_transfer(&superop::transfer_from_superop_complex(n, &s)?)?;
        let ch = Self::with_transfer(n, t);
        let _ = ch.kraus.set(kraus);
        Ok(ch)
    }

    pub fn from_choi(choi: CMatrix) -> Result<Self> {
        let n = superop::qubits_for_dim(choi.nrows())? / 2;
        check_cap("transfer matrix", n, MAX_TRANSFER_QUBITS)?;
        if choi.nrows() != 1 << (2 * n) || !choi.is_square() {
            return Err(Error::Shape("Choi matrix must be 4^n x 4^n".into()));
        }
        let s = superop::superop_from_choi(n, &choi);
        let t = real_transfer(&superop::transfer_from_superop_complex(n, &s)?)?;
        let ch = Self::with_transfer(n, t);
        let _ = ch.choi.set(choi);
        Ok(ch)
    }

    pub fn from_pauli_basis(p: CMatrix) -> Result<Self> {
        let n = superop::qubits_for_dim(p.nrows())? / 2;
        check_cap("transfer matrix", n, MAX_TRANSFER_QUBITS)?;
        if p.nrows() != 1 << (2 * n) || !p.is_square() {
            return Err(Error::Shape("Pauli-basis matrix must be 4^n x 4^n".into()));
        }
        let t = real_transfer(&superop::transfer_from_pauli_basis_complex(n, &p)?)?;
        let ch = Self::with_transfer(n, t);
        let _ = ch.pauli_basis.set(p);
        Ok(ch)
    }

    pub fn from_representation(repr: Representation) -> Result<Self> {
        match repr {
            Representation::Kraus(k) => Self::from_kraus(k),
            Representation::PauliBasis(p) => Self::from_pauli_basis(p),
            Representation::Transfer(t) => {
                let n = superop::qubits_for_dim(t.nrows())? / 2;
                Self::from_transfer(n, t)
            }
            Representation::Choi(c) => Self::from_choi(c),
        }
    }

    pub fn representation(&self, kind: ReprKind) -> Representation {
        match kind {
            ReprKind::Kraus => Representation::Kraus(self.kraus().to_vec()),
            ReprKind::PauliBasis => Representation::PauliBasis(self.pauli_basis().clone()),
            ReprKind::Transfer => Representation::Transfer(self.transfer.clone()),
            ReprKind::Choi => Representation::Choi(self.choi().clone()),
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_cap("transfer matrix", n, MAX_TRANSFER_QUBITS)?;
        let dim = 1usize << (2 * n);
        Ok(Self::with_transfer(n, RMatrix::identity(dim, dim)))
    }

    /// `ρ ↦ U ρ U†`.
    pub fn unitary(u: &CMatrix) -> Result<Self> {
        Self::from_kraus(vec![u.clone()])
    }

    /// `ρ ↦ P ρ P`, transfer `diag((-1)^<a,P>)`.
    pub fn pauli_conjugation(word: &PauliWord) -> Result<Self> {
        let n = word.n();
        check_cap("transfer matrix", n, MAX_TRANSFER_QUBITS)?;
        let c = word.index();
        let diag = (0..1usize << (2 * n))
            .map(|a| if sympl_index(n, a, c) == 1 { -1.0 } else { 1.0 })
            .collect::<Vec<_>>();
        Ok(Self::with_transfer(n, RMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Real transfer matrix `T_ab = 2^-n tr[P_a E(P_b)]`.
    pub fn transfer(&self) -> &RMatrix {
        &self.transfer
    }

    pub fn choi(&self) -> &CMatrix {
        self.choi.get_or_init(|| {
            let s = superop::superop_from_transfer(self.n, &self.transfer).expect("shape checked");
            superop::choi_from_superop(self.n, &s)
        })
    }

    pub fn pauli_basis(&self) -> &CMatrix {
        self.pauli_basis.get_or_init(|| {
            superop::pauli_basis_from_choi(self.n, self.choi()).expect("shape checked")
        })
    }

    /// Kraus operators; derived from the Choi spectrum when the channel was
    /// not built from Kraus form. Negative Choi eigenvalues (non-CP maps)
    /// are dropped.
    pub fn kraus(&self) -> &[CMatrix] {
        self.kraus.get_or_init(|| {
            let d = 1usize << self.n;
            let eig = linalg::hermitian_eigen(self.choi());
            let cutoff = 1e-13 * eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
            let mut ops = Vec::new();
            for (k, &mu) in eig.eigenvalues.iter().enumerate() {
                if mu <= cutoff {
                    continue;
                }
                let w = eig.eigenvectors.column(k);
                let s = Complex64::new(mu.sqrt(), 0.0);
                ops.push(CMatrix::from_fn(d, d, |r, i| w[i * d + r] * s));
            }
            if ops.is_empty() {
                ops.push(CMatrix::zeros(d, d));
            }
            ops
        })
    }

    /// Diagonal of the transfer matrix.
    pub fn pauli_eigenvalues(&self) -> PauliVector {
        PauliVector::new(self.n, self.transfer.diagonal().iter().copied().collect())
            .expect("transfer dimension is 4^n")
    }

    /// Applies the map to a `2^n x 2^n` operator.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = 1usize << self.n;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::Shape(format!("operator must be {d}x{d}")));
        }
        let s = superop::superop_from_transfer(self.n, &self.transfer)?;
        let v = nalgebra::DVector::from_iterator(d * d, (0..d * d).map(|i| rho[(i / d, i % d)]));
        let out = s * v;
        Ok(CMatrix::from_fn(d, d, |r, c| out[r * d + c]))
    }

    pub fn is_cptp(&self, tol: Tolerances) -> CptpReport {
        let d = (1usize << self.n) as f64;
        let choi = self.choi() / Complex64::new(d, 0.0);
        let min_eig = linalg::hermitian_eigenvalues(&choi)[0];
        let (mut worst, mut col) = (0.0f64, 0usize);
        for b in 0..self.transfer.ncols() {
            let expect = if b == 0 { 1.0 } else { 0.0 };
            let dev = (self.transfer[(0, b)] - expect).abs();
            if dev > worst {
                worst = dev;
                col = b;
            }
        }
        // a non-Hermitian Choi matrix would mean the map is not HP; transfer is
        // real by construction so only the spectrum and row 0 matter here
        CptpReport {
            is_cptp: min_eig >= -tol.cp && worst <= tol.tp,
            min_choi_eigenvalue: min_eig,
            max_tp_deviation: worst,
            tp_offending_column: col,
        }
    }
}

/// `a ∘ b`: apply `b` first, then `a`. Transfer matrix `T_a T_b`.
pub fn compose(a: &Channel, b: &Channel) -> Result<Channel> {
    if a.n != b.n {
        return Err(Error::SizeMismatch { left: a.n, right: b.n });
    }
    Ok(Channel::with_transfer(a.n, &a.transfer * &b.transfer))
}

/// Pauli-basis matrix `p_ab = Σ_i κ_ia κ*_ib`, `κ_ia = 2^-n tr(P_a† K_i)`.
pub fn pauli_basis_from_kraus(kraus: &[CMatrix]) -> Result<CMatrix> {
    let d = kraus.first().ok_or_else(|| Error::Shape("empty Kraus set".into()))?.nrows();
    let n = superop::qubits_for_dim(d)?;
    check_cap("Pauli-basis matrix", n, MAX_TRANSFER_QUBITS)?;
    let count = d * d;
    let words: Vec<_> = (0..count).map(|a| PauliWord::from_index(n, a).expect("in range").entries()).collect();
    let mut p = CMatrix::zeros(count, count);
    for k in kraus {
        if k.nrows() != d || k.ncols() != d {
            return Err(Error::Shape(format!("Kraus operators must all be {d}x{d}")));
        }
        // tr(P_a† K) = Σ conj(P_a[r,c]) K[r,c]
        let kappa: Vec<Complex64> = words
            .iter()
            .map(|e| e.iter().map(|&(r, c, v)| v.conj() * k[(r, c)]).sum::<Complex64>() / d as f64)
            .collect();
        for a in 0..count {
            for b in 0..count {
                p[(a, b)] += kappa[a] * kappa[b].conj();
            }
        }
    }
    Ok(p)
}

/// Choi matrix of a transfer-matrix channel.
pub fn choi_from_transfer(ch: &Channel) -> CMatrix {
    ch.choi().clone()
}

pub fn transfer_matrix(ch: &Channel) -> &RMatrix {
    ch.transfer()
}

pub fn pauli_eigenvalues(ch: &Channel) -> PauliVector {
    ch.pauli_eigenvalues()
}

pub fn is_cptp(ch: &Channel, tol: Tolerances) -> CptpReport {
    ch.is_cptp(tol)
}

/// A channel with diagonal transfer matrix, described by its Pauli
/// eigenvalues `f`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PauliChannel {
    f: PauliVector,
}

impl PauliChannel {
    pub fn from_eigenvalues(f: PauliVector) -> Self {
        Self { f }
    }

    pub fn from_probabilities(p: &PauliVector) -> Self {
        Self { f: crate::pauli::walsh_hadamard_p_to_f(p) }
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    pub fn eigenvalues(&self) -> &PauliVector {
        &self.f
    }

    pub fn probabilities(&self) -> Probabilities {
        walsh_hadamard_f_to_p(&self.f)
    }

    pub fn to_channel(&self) -> Result<Channel> {
        let n = self.f.n();
        check_cap("transfer matrix", n, MAX_TRANSFER_QUBITS)?;
        let diag = nalgebra::DVector::from_column_slice(self.f.values());
        Ok(Channel::with_transfer(n, RMatrix::from_diagonal(&diag)))
    }

    /// CPTP check without building the Choi matrix: for a Pauli channel the
    /// Choi spectrum is exactly the probability vector.
    pub fn is_cptp(&self, tol: Tolerances) -> CptpReport {
        let probs = self.probabilities();
        let min_p = probs.p.values().iter().copied().fold(f64::INFINITY, f64::min);
        let dev = (self.f.values()[0] - 1.0).abs();
        CptpReport {
            is_cptp: min_p >= -tol.cp && dev <= tol.tp,
            min_choi_eigenvalue: min_p,
            max_tp_deviation: dev,
            tp_offending_column: 0,
        }
    }
}

/// Pauli twirl: keeps the diagonal of the transfer matrix. Rejects inputs
/// that are not CPTP at the default tolerances.
pub fn twirl(ch: &Channel) -> Result<PauliChannel> {
    twirl_with(ch, Tolerances::default())
}

pub fn twirl_with(ch: &Channel, tol: Tolerances) -> Result<PauliChannel> {
    let report = ch.is_cptp(tol);
    if !report.is_cptp {
        return Err(Error::NotCptp(format!(
            "min Choi eigenvalue {:.3e}, trace deviation {:.3e}",
            report.min_choi_eigenvalue, report.max_tp_deviation
        )));
    }
    Ok(PauliChannel::from_eigenvalues(ch.pauli_eigenvalues()))
}
