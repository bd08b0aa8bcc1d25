//! GKSL generators in the Pauli basis, their propagation, the gate-frame
//! transformation, and the general channel-logarithm CSM test.
//!
//! A generator is `L(ρ) = -i[H, ρ] + Σ_ab Γ_ab (P_a ρ P_b - ½{P_b P_a, ρ})`
//! with `a, b` running over non-identity words in canonical order. Writing
//! `L(ρ) = Kρ + ρK† + Σ Γ_ab P_a ρ P_b`, `K = -iH - ½ Σ Γ_ab P_b P_a`, the
//! Pauli-basis matrix of `L` has `c_00 = 2 Re k_0`, `c_a0 = k_a`,
//! `c_0b = conj(k_b)` and `c_ab = Γ_ab`, which makes the Hamiltonian /
//! dissipative split a direct read-off.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::channel::{compose, Channel, MAX_TRANSFER_QUBITS};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix, RMatrix, ZERO};
use crate::pauli::{check_cap, mul_index, PauliWord};
use crate::plmodel::{classify_pauli, CsmVerdict, Witness};
use crate::superop;

/// Zero-eigenvalue cutoff for the principal-log availability check.
pub const LOG_ZERO_TOL: f64 = 1e-12;

/// A time-independent GKSL generator.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator {
    n: usize,
    hamiltonian: CMatrix,
    kossakowski: CMatrix,
}

fn scaled_tol(m: &CMatrix, tol: f64) -> f64 {
    tol * linalg::max_abs(m).max(1.0)
}

/// `tr(P_a M) / d` for every word `a`.
fn pauli_coefficients(n: usize, m: &CMatrix) -> Vec<Complex64> {
    let d = 1usize << n;
    (0..d * d)
        .map(|a| {
            let p = PauliWord::from_index(n, a).expect("in range");
            let tr: Complex64 = p.entries().into_iter().map(|(r, c, v)| v * m[(c, r)]).sum();
            tr / d as f64
        })
        .collect()
}

fn from_pauli_coefficients(n: usize, coeffs: &[Complex64]) -> CMatrix {
    let d = 1usize << n;
    let mut m = CMatrix::from_element(d, d, ZERO);
    for (a, &k) in coeffs.iter().enumerate() {
        if k == ZERO {
            continue;
        }
        for (r, c, v) in PauliWord::from_index(n, a).expect("in range").entries() {
            m[(r, c)] += k * v;
        }
    }
    m
}

impl LindbladGenerator {
    /// Validates shapes and Hermiticity (to `1e-12`, relative).
    pub fn new(hamiltonian: CMatrix, kossakowski: CMatrix) -> Result<Self> {
        let d = hamiltonian.nrows();
        let n = superop::qubits_for_dim(d)?;
        check_cap("generator", n, MAX_TRANSFER_QUBITS)?;
        if hamiltonian.ncols() != d {
            return Err(Error::Shape("Hamiltonian must be square".into()));
        }
        let k = d * d - 1;
        if kossakowski.nrows() != k || kossakowski.ncols() != k {
            return Err(Error::Shape(format!(
                "Kossakowski matrix for n = {n} must be {k}x{k}, got {}x{}",
                kossakowski.nrows(),
                kossakowski.ncols()
            )));
        }
        for (what, m) in [("Hamiltonian", &hamiltonian), ("Kossakowski matrix", &kossakowski)] {
            let residue = linalg::hermitian_residue(m);
            if residue > scaled_tol(m, 1e-12) {
                return Err(Error::NotHermitian { what, residue });
            }
        }
        Ok(Self { n, hamiltonian, kossakowski })
    }

    pub fn zero(n: usize) -> Result<Self> {
        check_cap("generator", n, MAX_TRANSFER_QUBITS)?;
        let d = 1usize << n;
        Self::new(CMatrix::from_element(d, d, ZERO), CMatrix::from_element(d * d - 1, d * d - 1, ZERO))
    }

    /// Generator from a Hamiltonian and `(rate, L)` jump pairs, i.e.
    /// `Σ γ (L ρ L† - ½{L†L, ρ})`. Identity components of the jump
    /// operators are moved into the Hamiltonian.
    pub fn from_jumps(hamiltonian: CMatrix, jumps: &[(f64, CMatrix)]) -> Result<Self> {
        let d = hamiltonian.nrows();
        let n = superop::qubits_for_dim(d)?;
        let k = d * d - 1;
        let mut h = hamiltonian;
        let mut gamma = CMatrix::from_element(k, k, ZERO);
        for (rate, l) in jumps {
            if l.nrows() != d || l.ncols() != d {
                return Err(Error::Shape("jump operator dimension does not match H".into()));
            }
            if !(*rate >= 0.0) {
                return Err(invalid("rate", "jump rates must be nonnegative"));
            }
            let coeffs = pauli_coefficients(n, l);
            let c = coeffs[0];
            let mut rest = coeffs.clone();
            rest[0] = ZERO;
            let l_rest = from_pauli_coefficients(n, &rest);
            h += (l_rest.clone() * c.conj() - l_rest.adjoint() * c) * Complex64::new(0.0, 0.5 * rate);
            for a in 1..=k {
                for b in 1..=k {
                    gamma[(a - 1, b - 1)] += coeffs[a] * coeffs[b].conj() * *rate;
                }
            }
        }
        Self::new(h, gamma)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn kossakowski(&self) -> &CMatrix {
        &self.kossakowski
    }

    pub fn scaled(&self, s: f64) -> Self {
        let s = Complex64::new(s, 0.0);
        Self { n: self.n, hamiltonian: &self.hamiltonian * s, kossakowski: &self.kossakowski * s }
    }

    /// The Hamiltonian part alone (`Γ = 0`).
    pub fn hamiltonian_part(&self) -> Self {
        let k = self.kossakowski.nrows();
        Self { n: self.n, hamiltonian: self.hamiltonian.clone(), kossakowski: CMatrix::from_element(k, k, ZERO) }
    }

    /// The dissipative part alone (`H = 0`).
    pub fn dissipative_part(&self) -> Self {
        let d = self.hamiltonian.nrows();
        Self { n: self.n, hamiltonian: CMatrix::from_element(d, d, ZERO), kossakowski: self.kossakowski.clone() }
    }

    /// Pauli-basis matrix of the generator superoperator.
    fn pauli_basis(&self) -> CMatrix {
        let n = self.n;
        let len = 1usize << (2 * n);
        let h = pauli_coefficients(n, &self.hamiltonian);
        let mut k: Vec<Complex64> = h.iter().map(|&x| Complex64::new(0.0, -1.0) * x).collect();
        for a in 1..len {
            for b in 1..len {
                let g = self.kossakowski[(a - 1, b - 1)];
                if g == ZERO {
                    continue;
                }
                let (phase, c) = mul_index(n, b, a);
                k[c] -= g * Complex64::i().powu(phase) * 0.5;
            }
        }
        let mut c = CMatrix::from_element(len, len, ZERO);
        c[(0, 0)] = Complex64::new(2.0 * k[0].re, 0.0);
        for a in 1..len {
            c[(a, 0)] = k[a];
            c[(0, a)] = k[a].conj();
            for b in 1..len {
                c[(a, b)] = self.kossakowski[(a - 1, b - 1)];
            }
        }
        c
    }
}

/// Real transfer matrix of the generator. Row 0 vanishes.
pub fn generator_transfer(g: &LindbladGenerator) -> Result<RMatrix> {
    let t = superop::transfer_from_pauli_basis_complex(g.n, &g.pauli_basis())?;
    let tol = scaled_tol(&t, 1e-12);
    linalg::real_part_checked(&t, tol)
}

/// Inverse of [`generator_transfer`]: the unique traceless Hermitian `H`
/// and Hermitian `Γ` reproducing `t`.
pub fn hamiltonian_dissipative_split(n: usize, t: &RMatrix) -> Result<LindbladGenerator> {
    check_cap("generator", n, MAX_TRANSFER_QUBITS)?;
    let c = superop::pauli_basis_from_transfer(n, t)?;
    let len = 1usize << (2 * n);
    let mut h_coeffs = vec![ZERO; len];
    for a in 1..len {
        h_coeffs[a] = Complex64::new(-c[(a, 0)].im, 0.0);
    }
    let h = from_pauli_coefficients(n, &h_coeffs);
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let gamma = c.view((1, 1), (len - 1, len - 1)).into_owned();
    let gamma = (&gamma + gamma.adjoint()) * Complex64::new(0.5, 0.0);
    let g = LindbladGenerator { n, hamiltonian: h, kossakowski: gamma };
    let rebuilt = generator_transfer(&g)?;
    let residue = linalg::max_abs_real(&(rebuilt - t));
    if residue > 1e-10 * linalg::max_abs_real(t).max(1.0) {
        return Err(Error::InconsistentGenerator { residue });
    }
    Ok(g)
}

/// `e^{t L}` for a constant generator.
pub fn propagate_constant(g: &LindbladGenerator, t: f64) -> Result<Channel> {
    if !(t >= 0.0) {
        return Err(invalid("t", "time must be nonnegative"));
    }
    let tl = generator_transfer(g)? * t;
    Channel::from_transfer(g.n, linalg::expm(&tl))
}

/// Caller-supplied evaluator `t ↦ L(t)`. Must be reentrant.
pub type GeneratorFn = dyn Fn(f64) -> Result<LindbladGenerator> + Send + Sync;

/// A generator with explicit time dependence.
#[derive(Clone)]
pub struct TimeDependentGenerator {
    n: usize,
    eval: Arc<GeneratorFn>,
}

impl fmt::Debug for TimeDependentGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentGenerator").field("n", &self.n).finish_non_exhaustive()
    }
}

impl TimeDependentGenerator {
    pub fn new(n: usize, eval: impl Fn(f64) -> Result<LindbladGenerator> + Send + Sync + 'static) -> Self {
        Self { n, eval: Arc::new(eval) }
    }

    pub fn constant(g: LindbladGenerator) -> Self {
        let n = g.n;
        Self::new(n, move |_| Ok(g.clone()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, t: f64) -> Result<LindbladGenerator> {
        let g = (self.eval)(t)?;
        if g.n != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: g.n });
        }
        Ok(g)
    }

    pub fn transfer_at(&self, t: f64) -> Result<RMatrix> {
        generator_transfer(&self.at(t)?)
    }
}

/// Ordered product of midpoint exponentials `exp(Δt T_L(t_k + Δt/2))`,
/// later times on the left. Second order in `Δt`.
pub fn propagate_timedep(g: &TimeDependentGenerator, t: f64, steps: usize) -> Result<Channel> {
    if steps == 0 {
        return Err(invalid("steps", "need at least one step"));
    }
    if !(t >= 0.0) {
        return Err(invalid("t", "time must be nonnegative"));
    }
    let dim = 1usize << (2 * g.n);
    let dt = t / steps as f64;
    let mut acc = RMatrix::identity(dim, dim);
    for k in 0..steps {
        let mid = (k as f64 + 0.5) * dt;
        let step = linalg::expm(&(g.transfer_at(mid)? * dt));
        acc = step * acc;
    }
    Channel::from_transfer(g.n, acc)
}

/// Transfer matrix of `ρ ↦ U† ρ U` restricted to non-identity words.
fn inverse_conjugation_block(u: &CMatrix) -> Result<RMatrix> {
    let ch = Channel::unitary(&u.adjoint())?;
    let len = ch.transfer().nrows();
    Ok(ch.transfer().view((1, 1), (len - 1, len - 1)).into_owned())
}

/// Kossakowski matrix seen in the frame co-moving with `U`, i.e. with jump
/// operators `U† F U`: `Γ̃ = T Γ Tᵀ` where `T` is the transfer matrix of
/// `ρ ↦ U† ρ U` on the non-identity words. `T` is orthogonal, so the
/// spectrum of `Γ` is preserved.
pub fn gate_frame_kossakowski(gamma: &CMatrix, u: &CMatrix) -> Result<CMatrix> {
    let d = u.nrows();
    if u.ncols() != d || gamma.nrows() != d * d - 1 || gamma.ncols() != d * d - 1 {
        return Err(Error::Shape(format!(
            "Kossakowski matrix {}x{} does not match a {d}x{d} unitary",
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    let t = linalg::to_complex(&inverse_conjugation_block(u)?);
    Ok(&t * gamma * t.transpose())
}

/// Evaluator `t ↦ U(t)` for a target unitary path with `U(0) = 1`.
pub type UnitaryFn = dyn Fn(f64) -> CMatrix + Send + Sync;

/// Target gate: unitary path and gate time.
#[derive(Clone)]
pub struct GateContext {
    n: usize,
    unitary: Arc<UnitaryFn>,
    t_g: f64,
}

impl fmt::Debug for GateContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GateContext").field("n", &self.n).field("t_g", &self.t_g).finish_non_exhaustive()
    }
}

impl GateContext {
    /// Checks `U(0) = 1` and unitarity (to `1e-10`) at five points of `[0, t_g]`.
    pub fn new(n: usize, t_g: f64, unitary: impl Fn(f64) -> CMatrix + Send + Sync + 'static) -> Result<Self> {
        check_cap("gate", n, MAX_TRANSFER_QUBITS)?;
        if !(t_g > 0.0) {
            return Err(invalid("t_g", "gate time must be positive"));
        }
        let d = 1usize << n;
        let id = CMatrix::identity(d, d);
        for k in 0..=4 {
            let t = t_g * k as f64 / 4.0;
            let u = unitary(t);
            if u.nrows() != d || u.ncols() != d {
                return Err(Error::Shape(format!("U({t}) is not {d}x{d}")));
            }
            if linalg::max_abs(&(u.adjoint() * &u - &id)) > 1e-10 {
                return Err(invalid("unitary", format!("U({t}) is not unitary")));
            }
            if k == 0 && linalg::max_abs(&(u - &id)) > 1e-10 {
                return Err(invalid("unitary", "U(0) must be the identity"));
            }
        }
        Ok(Self { n, unitary: Arc::new(unitary), t_g })
    }

    /// `U(t) = exp(-i H t)` for a constant Hamiltonian.
    pub fn from_hamiltonian(h: &CMatrix, t_g: f64) -> Result<Self> {
        let n = superop::qubits_for_dim(h.nrows())?;
        let eig = linalg::hermitian_eigen(h);
        let vecs = eig.eigenvectors.clone();
        let vals = eig.eigenvalues.clone();
        Self::new(n, t_g, move |t| {
            let phases = CMatrix::from_diagonal(&vals.map(|e| Complex64::new(0.0, -e * t).exp()));
            &vecs * phases * vecs.adjoint()
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_g(&self) -> f64 {
        self.t_g
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        (self.unitary)(t)
    }

    /// Gate-frame generator `t ↦ (0, Γ̃(t))` for a lab-frame generator whose
    /// Hamiltonian is exactly the one generating `U(t)`.
    pub fn gate_frame(&self, lab: &LindbladGenerator) -> Result<TimeDependentGenerator> {
        if lab.n != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: lab.n });
        }
        let ctx = self.clone();
        let gamma = lab.kossakowski.clone();
        let d = 1usize << self.n;
        Ok(TimeDependentGenerator::new(self.n, move |t| {
            let g = gate_frame_kossakowski(&gamma, &ctx.unitary(t))?;
            let g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
            LindbladGenerator::new(CMatrix::from_element(d, d, ZERO), g)
        }))
    }
}

/// Error channel `𝓔 = 𝒰⁻¹ ∘ Φ` with `𝒰` the target unitary at `t_g`.
pub fn error_channel(phi: &Channel, ctx: &GateContext) -> Result<Channel> {
    if phi.n() != ctx.n {
        return Err(Error::SizeMismatch { left: phi.n(), right: ctx.n });
    }
    let undo = Channel::unitary(&ctx.unitary(ctx.t_g).adjoint())?;
    compose(&undo, phi)
}

/// Principal-logarithm generator of a channel, split into `H` and `Γ`.
pub fn channel_log_generator(ch: &Channel) -> Result<LindbladGenerator> {
    let t = ch.transfer();
    linalg::principal_log_available(t, LOG_ZERO_TOL)?;
    let log = linalg::logm(&linalg::to_complex(t))?;
    let residue = linalg::max_imag(&log);
    if residue > 1e-9 * linalg::max_abs(&log).max(1.0) {
        return Err(Error::NotHermiticityPreserving { residue });
    }
    let log = log.map(|z| z.re);
    let row0 = log.row(0).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if row0 > 1e-9 * linalg::max_abs_real(&log).max(1.0) {
        return Err(Error::NotCptp(format!(
            "logarithm row 0 deviates by {row0:.3e}; channel is not trace preserving"
        )));
    }
    hamiltonian_dissipative_split(ch.n(), &log)
}

/// CSM test for a general channel via its principal logarithm. CSM iff
/// the logarithm is real and its Kossakowski matrix is PSD, i.e. its least
/// eigenvalue is at least `-tol (1 + ‖Γ‖)`.
///
/// Only the principal branch is examined: a spectrum touching zero or the
/// negative real axis gives [`Error::PrincipalBranchUnavailable`].
pub fn csm_test_general(ch: &Channel, tol: f64) -> Result<CsmVerdict> {
    if !(tol > 0.0) {
        return Err(invalid("tol", "tolerance must be positive"));
    }
    let g = match channel_log_generator(ch) {
        Ok(g) => g,
        Err(Error::NotHermiticityPreserving { .. }) => {
            return Ok(CsmVerdict {
                is_csm: false,
                witness: Witness::KossakowskiSpectrum(Vec::new()),
                min_value: f64::NEG_INFINITY,
                tol,
            })
        }
        Err(e) => return Err(e),
    };
    let spectrum = linalg::hermitian_eigenvalues(&g.kossakowski);
    let norm = spectrum.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min_value = spectrum.first().copied().unwrap_or(0.0);
    Ok(CsmVerdict {
        is_csm: min_value >= -tol * (1.0 + norm),
        witness: Witness::KossakowskiSpectrum(spectrum),
        min_value,
        tol,
    })
}

/// Pauli channels (transfer matrix diagonal to within `tol`) go through
/// [`classify_pauli`], everything else through [`csm_test_general`].
pub fn classify_channel(ch: &Channel, tol: f64) -> Result<CsmVerdict> {
    let t = ch.transfer();
    let off_diagonal = (0..t.nrows())
        .flat_map(|i| (0..t.ncols()).filter(move |&j| j != i).map(move |j| (i, j)))
        .fold(0.0f64, |m, (i, j)| m.max(t[(i, j)].abs()));
    if off_diagonal <= tol {
        classify_pauli(&ch.pauli_eigenvalues(), tol)
    } else {
        csm_test_general(ch, tol)
    }
}
