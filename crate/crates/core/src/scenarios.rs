//! Worked single-qubit examples: Hadamard dephasing (with and without
//! relaxation) and the noisy `R_x(ϑ)` gate, in closed form, through the full
//! numeric pipeline, by cumulant expansion, and as a CSM phase diagram.
//!
//! Rates are dimensionless products with the evolution or gate time
//! (`γt`, `γ_φ t`). For the gate, time is measured in units of `t_g`, so the
//! drive strength is `A = ϑ` and `√X` is `ϑ = π/2`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{twirl, Channel};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix, RMatrix, ZERO};
use crate::lindblad::{
    csm_test_general, error_channel, generator_transfer, propagate_constant, GateContext, LindbladGenerator,
    TimeDependentGenerator,
};
use crate::pauli::PauliWord;
use crate::plmodel::{classify_pl, lambda_from_f, lambda_from_log_f, PLParams, DEFAULT_CSM_TOL};

/// Tolerance for pre-twirl (channel-logarithm) CSM verdicts.
pub const PRETWIRL_TOL: f64 = 1e-9;

/// Relaxation and dephasing rates (per unit time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRates {
    pub gamma: f64,
    pub gamma_phi: f64,
}

impl NoiseRates {
    pub fn new(gamma: f64, gamma_phi: f64) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(invalid("gamma", "relaxation rate must be nonnegative"));
        }
        if !(gamma_phi >= 0.0) {
            return Err(invalid("gamma_phi", "dephasing rate must be nonnegative"));
        }
        Ok(Self { gamma, gamma_phi })
    }

    /// Rates from relaxation time `T1` and Ramsey time `T2*`:
    /// `γ = 1/T1`, `γ_φ = 1/T2* - 1/(2 T1)`. Requires `T2* ≤ 2 T1`.
    pub fn from_times(t1: f64, t2_star: f64) -> Result<Self> {
        if !(t1 > 0.0) || !(t2_star > 0.0) {
            return Err(invalid("T1/T2*", "times must be positive"));
        }
        let gamma_phi = 1.0 / t2_star - 0.5 / t1;
        if gamma_phi < 0.0 {
            return Err(invalid("T2*", "T2* exceeds 2 T1"));
        }
        Self::new(1.0 / t1, gamma_phi)
    }

    /// `(γt, γ_φ t)`.
    pub fn times(&self, t: f64) -> (f64, f64) {
        (self.gamma * t, self.gamma_phi * t)
    }
}

/// Single-qubit PL parameters `(λ_x, λ_y, λ_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitLambda {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl QubitLambda {
    pub fn from_params(pl: &PLParams) -> Result<Self> {
        if pl.n() != 1 {
            return Err(invalid("pl", "expected single-qubit parameters"));
        }
        for (w, l) in pl.terms() {
            if l.im != 0.0 {
                return Err(Error::ComplexLambda { word: w.label() });
            }
        }
        Ok(Self { x: pl.lambda_re("X"), y: pl.lambda_re("Y"), z: pl.lambda_re("Z") })
    }

    pub fn to_params(&self) -> PLParams {
        PLParams::from_labels(1, [("X", self.x), ("Y", self.y), ("Z", self.z)]).expect("valid labels")
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs()).max((self.z - other.z).abs())
    }

    pub fn min(&self) -> f64 {
        self.x.min(self.y).min(self.z)
    }
}

fn pauli(label: &str) -> CMatrix {
    PauliWord::from_label(label).expect("valid label").matrix().expect("small")
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_nonneg(field: &'static str, v: f64) -> Result<()> {
    if !(v >= 0.0) {
        return Err(invalid(field, "must be nonnegative"));
    }
    Ok(())
}

/// Closed form for dephasing with jump `(X + Z)/√2`, `x = γ_φ t`:
/// `λ_x = λ_z = x/2`, `λ_y = -½ ln cosh x`.
pub fn hadamard_dephasing_lambda(x: f64) -> Result<QubitLambda> {
    check_nonneg("gamma_phi_t", x)?;
    Ok(QubitLambda { x: x / 2.0, y: -0.5 * x.cosh().ln(), z: x / 2.0 })
}

/// Closed form with an added relaxation channel, `x = γ_φ t`, `y = γt`:
/// `λ_x = λ_z = x/2 + y/8`, `λ_y = y/4 - ½ ln cosh(x - y/4)`.
pub fn hadamard_dephasing_relaxation_lambda(x: f64, y: f64) -> Result<QubitLambda> {
    check_nonneg("gamma_phi_t", x)?;
    check_nonneg("gamma_t", y)?;
    let xz = x / 2.0 + y / 8.0;
    Ok(QubitLambda { x: xz, y: y / 4.0 - 0.5 * (x - y / 4.0).cosh().ln(), z: xz })
}

/// Lowering operator `|0⟩⟨1|`.
pub fn sigma_minus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c(1.0), ZERO, ZERO])
}

/// `R_y(ϑ) = exp(-iϑY/2)`.
pub fn ry(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
}

/// Generator with the jumps `Z` (rate `γ_φ`) and `σ₋` (rate `γ`), both
/// conjugated by `R_y(π/4)`; no Hamiltonian. The dephasing jump is
/// `(X + Z)/√2`.
pub fn hadamard_generator(rates: NoiseRates) -> Result<LindbladGenerator> {
    let r = ry(std::f64::consts::FRAC_PI_4);
    let tilt = |m: CMatrix| &r * m * r.adjoint();
    LindbladGenerator::from_jumps(
        CMatrix::from_element(2, 2, ZERO),
        &[(rates.gamma_phi, tilt(pauli("Z"))), (rates.gamma, tilt(sigma_minus()))],
    )
}

/// Numeric route for the Hadamard examples: propagate to `t = 1`, twirl, λ.
pub fn hadamard_lambda_numeric(gamma_phi_t: f64, gamma_t: f64) -> Result<QubitLambda> {
    let g = hadamard_generator(NoiseRates::new(gamma_t, gamma_phi_t)?)?;
    let ch = propagate_constant(&g, 1.0)?;
    QubitLambda::from_params(&lambda_from_f(twirl(&ch)?.eigenvalues())?)
}

/// Kossakowski matrix for relaxation plus `Z` dephasing in canonical
/// non-identity order, built from the `(X, Y, Z)`-ordered matrix
/// `¼ [[γ, iγ, 0], [-iγ, γ, 0], [0, 0, 4γ_φ]]`.
pub fn relaxation_dephasing_kossakowski(rates: NoiseRates) -> CMatrix {
    let g = rates.gamma / 4.0;
    let xyz = [
        [c(g), Complex64::new(0.0, g), ZERO],
        [Complex64::new(0.0, -g), c(g), ZERO],
        [ZERO, ZERO, c(rates.gamma_phi)],
    ];
    let idx = ["X", "Y", "Z"].map(|l| PauliWord::from_label(l).expect("label").index() - 1);
    let mut out = CMatrix::from_element(3, 3, ZERO);
    for i in 0..3 {
        for j in 0..3 {
            out[(idx[i], idx[j])] = xyz[i][j];
        }
    }
    out
}

/// Noisy resonant `x` rotation: lab-frame generator (`H = AX/2`) and the
/// target gate with `U(t) = exp(-iAXt/2)`.
#[derive(Debug, Clone)]
pub struct RxGate {
    pub lab: LindbladGenerator,
    pub context: GateContext,
    pub theta: f64,
}

impl RxGate {
    /// Rotation angle `ϑ = A t_g`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Only `ϑ = mπ/2` gives a Clifford gate, which Pauli twirling requires.
    pub fn is_clifford(&self) -> bool {
        let m = self.theta / FRAC_PI_2;
        (m - m.round()).abs() < 1e-12
    }

    /// Gate-frame generator `t ↦ (0, Γ̃(t))`.
    pub fn gate_frame(&self) -> Result<TimeDependentGenerator> {
        self.context.gate_frame(&self.lab)
    }

    /// `Φ = e^{t_g L}`.
    pub fn noisy_gate(&self) -> Result<Channel> {
        propagate_constant(&self.lab, self.context.t_g())
    }

    /// `𝓔 = 𝒰⁻¹ ∘ Φ`, exact (single exponential).
    pub fn error_channel(&self) -> Result<Channel> {
        error_channel(&self.noisy_gate()?, &self.context)
    }
}

pub fn rx_gate_setup(rates: NoiseRates, drive: f64, t_g: f64) -> Result<RxGate> {
    if !(drive > 0.0) {
        return Err(invalid("A", "drive strength must be positive"));
    }
    let h = pauli("X") * c(drive / 2.0);
    let lab = LindbladGenerator::new(h.clone(), relaxation_dephasing_kossakowski(rates))?;
    let context = GateContext::from_hamiltonian(&h, t_g)?;
    Ok(RxGate { lab, context, theta: drive * t_g })
}

/// The rotation gate in units of `t_g`: rates `γt_g`, `γ_φt_g`, `A = ϑ`.
pub fn rx_gate_unit_time(gamma_tg: f64, gammaphi_tg: f64, theta: f64) -> Result<RxGate> {
    rx_gate_setup(NoiseRates::new(gamma_tg, gammaphi_tg)?, theta, 1.0)
}

/// λ of the twirled error channel of `R_x(ϑ)`.
pub fn rx_lambda_numeric(gamma_tg: f64, gammaphi_tg: f64, theta: f64) -> Result<QubitLambda> {
    let e = rx_gate_unit_time(gamma_tg, gammaphi_tg, theta)?.error_channel()?;
    QubitLambda::from_params(&lambda_from_f(twirl(&e)?.eigenvalues())?)
}

/// λ of the twirled `√X` error channel.
pub fn sqrtx_lambda_numeric(gamma_tg: f64, gammaphi_tg: f64) -> Result<QubitLambda> {
    rx_lambda_numeric(gamma_tg, gammaphi_tg, FRAC_PI_2)
}

/// Second-order expansion of the rotation-gate PL parameters:
/// `λ_x ≈ γ/4 - (sin⁴ϑ / 4ϑ²)(γ_φ - γ/4)²`,
/// `λ_{y,z} ≈ (γ/8)(1 ± s) + (γ_φ/2)(1 ∓ s)` with `s = sin 2ϑ / 2ϑ`.
pub fn sqrtx_lambda_second_order(gamma_tg: f64, gammaphi_tg: f64, theta: f64) -> Result<QubitLambda> {
    if !(theta > 0.0) {
        return Err(invalid("theta", "rotation angle must be positive"));
    }
    let s = (2.0 * theta).sin() / (2.0 * theta);
    let k = theta.sin().powi(4) / (4.0 * theta * theta);
    Ok(QubitLambda {
        x: gamma_tg / 4.0 - k * (gammaphi_tg - gamma_tg / 4.0).powi(2),
        y: gamma_tg / 8.0 * (1.0 + s) + gammaphi_tg / 2.0 * (1.0 - s),
        z: gamma_tg / 8.0 * (1.0 - s) + gammaphi_tg / 2.0 * (1.0 + s),
    })
}

/// First and second cumulants of the interaction-picture dissipator
/// `T_D(s) = e^{-s T_H} T_D e^{s T_H}`:
/// `C1 = ∫₀^{t_g} T_D(s) ds`,
/// `C2 = ½ ∫₀^{t_g} ds₁ ∫₀^{s₁} ds₂ [T_D(s₁), T_D(s₂)]`,
/// by (nested) Gauss-Legendre quadrature with `nodes` points per level.
pub fn cumulant_c1_c2(th: &RMatrix, td: &RMatrix, t_g: f64, nodes: usize) -> Result<(RMatrix, RMatrix)> {
    if nodes < 4 {
        return Err(invalid("nodes", "need at least 4 quadrature nodes"));
    }
    if th.shape() != td.shape() || !th.is_square() {
        return Err(Error::Shape("T_H and T_D must be square and equal in size".into()));
    }
    let rotated = |s: f64| linalg::expm(&(th * -s)) * td * linalg::expm(&(th * s));
    let dim = th.nrows();
    let mut c1 = RMatrix::zeros(dim, dim);
    let mut c2 = RMatrix::zeros(dim, dim);
    for (s1, w1) in linalg::gauss_legendre(nodes, 0.0, t_g) {
        let a = rotated(s1);
        c1 += &a * w1;
        for (s2, w2) in linalg::gauss_legendre(nodes, 0.0, s1) {
            let b = rotated(s2);
            c2 += (&a * &b - &b * &a) * (0.5 * w1 * w2);
        }
    }
    Ok((c1, c2))
}

/// λ from the second-order cumulant approximation
/// `T_𝓔 ≈ 1 + C1 + C1²/2 + C2`, with `ln f ≈ f⁽¹⁾ + f⁽²⁾ - (f⁽¹⁾)²/2`.
pub fn rx_lambda_cumulant(gamma_tg: f64, gammaphi_tg: f64, theta: f64, nodes: usize) -> Result<QubitLambda> {
    let gate = rx_gate_unit_time(gamma_tg, gammaphi_tg, theta)?;
    let th = generator_transfer(&gate.lab.hamiltonian_part())?;
    let td = generator_transfer(&gate.lab.dissipative_part())?;
    let (c1, c2) = cumulant_c1_c2(&th, &td, 1.0, nodes)?;
    let second = &c1 * &c1 * 0.5 + c2;
    let logs: Vec<Complex64> = (0..4)
        .map(|k| {
            let f1 = c1[(k, k)];
            c(f1 + second[(k, k)] - 0.5 * f1 * f1)
        })
        .collect();
    QubitLambda::from_params(&lambda_from_log_f(1, &logs)?)
}

/// Which worked example a quadratic criterion refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Hadamard,
    Sqrtx,
}

/// Small-rate condition for twirling to break CSM: `γt < (γ_φt)²` for the
/// Hadamard example, `γt_g < (2/π)² (γ_φt_g)²` for `√X`.
pub fn csmb_criterion(gamma_t: f64, gammaphi_t: f64, which: Scenario) -> bool {
    let factor = match which {
        Scenario::Hadamard => 1.0,
        Scenario::Sqrtx => (2.0 / std::f64::consts::PI).powi(2),
    };
    gamma_t < factor * gammaphi_t * gammaphi_t
}

/// Root in `γt_g` of the second-order `λ_x = 0` curve at fixed `γ_φt_g`:
/// the smaller solution of `γ/4 = k (γ_φ - γ/4)²`, `k = sin⁴ϑ / 4ϑ²`.
pub fn second_order_crossing(gammaphi_tg: f64, theta: f64) -> Result<f64> {
    check_nonneg("gammaphi_tg", gammaphi_tg)?;
    if !(theta > 0.0) {
        return Err(invalid("theta", "rotation angle must be positive"));
    }
    let k = theta.sin().powi(4) / (4.0 * theta * theta);
    if k == 0.0 {
        return Ok(0.0);
    }
    let b = 2.0 * k * gammaphi_tg + 1.0;
    let disc = b * b - 4.0 * k * k * gammaphi_tg * gammaphi_tg;
    // u = γ/4; rationalized smaller root of k u² - b u + k γ_φ² = 0
    let u = 2.0 * k * gammaphi_tg * gammaphi_tg / (b + disc.sqrt());
    Ok(4.0 * u)
}

fn bisect(mut lo: f64, mut hi: f64, iters: usize, mut below: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if below(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Numerically located `λ_x = 0` crossing in `γt_g` at fixed `γ_φt_g`
/// (bisection on the exact pipeline). `None` if `λ_x ≥ 0` already at `γ = 0`.
pub fn lambda_x_zero_crossing(gammaphi_tg: f64, theta: f64) -> Result<Option<f64>> {
    let lx = |g: f64| rx_lambda_numeric(g, gammaphi_tg, theta).map(|l| l.x);
    if lx(0.0)? >= 0.0 {
        return Ok(None);
    }
    let mut hi = second_order_crossing(gammaphi_tg, theta)?.max(1e-6) * 2.0;
    while lx(hi)? < 0.0 {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(invalid("gammaphi_tg", "no λ_x = 0 crossing found"));
        }
    }
    bisect(0.0, hi, 60, |g| lx(g).map(|v| v < 0.0)).map(Some)
}

/// Pre-twirl CSM verdict of the rotation-gate error channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreTwirl {
    Csm,
    NonCsm,
    Inconclusive,
}

impl PreTwirl {
    pub fn as_str(&self) -> &'static str {
        match self {
            PreTwirl::Csm => "true",
            PreTwirl::NonCsm => "false",
            PreTwirl::Inconclusive => "inconclusive",
        }
    }
}

fn pretwirl_verdict(e: &Channel) -> Result<(PreTwirl, f64)> {
    match csm_test_general(e, PRETWIRL_TOL) {
        Ok(v) if v.is_csm => Ok((PreTwirl::Csm, v.min_value)),
        Ok(v) => Ok((PreTwirl::NonCsm, v.min_value)),
        Err(Error::PrincipalBranchUnavailable(_)) => Ok((PreTwirl::Inconclusive, f64::NAN)),
        Err(e) => Err(e),
    }
}

/// Smallest `γ_φt_g` in `(lo, hi]` at which the pre-twirl channel stops being
/// CSM, for fixed `γt_g`: a scan with `scan` steps refined by bisection.
/// `None` if it stays CSM on the whole scan.
pub fn pretwirl_boundary(gamma_tg: f64, lo: f64, hi: f64, scan: usize, theta: f64) -> Result<Option<f64>> {
    let is_csm = |gp: f64| -> Result<bool> {
        let e = rx_gate_unit_time(gamma_tg, gp, theta)?.error_channel()?;
        Ok(pretwirl_verdict(&e)?.0 == PreTwirl::Csm)
    };
    let step = (hi - lo) / scan.max(1) as f64;
    let mut prev = lo;
    for i in 1..=scan.max(1) {
        let x = lo + step * i as f64;
        if !is_csm(x)? {
            return bisect(prev, x, 50, is_csm).map(Some);
        }
        prev = x;
    }
    Ok(None)
}

/// Effect of twirling on CSM at one point of the phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// CSM broken by twirling.
    #[serde(rename = "CSMB")]
    Csmb,
    /// CSM conserved.
    #[serde(rename = "CSMC")]
    Csmc,
    /// CSM instated.
    #[serde(rename = "CSMI")]
    Csmi,
    /// Non-CSM conserved.
    #[serde(rename = "nCSMC")]
    Ncsmc,
    /// Pre-twirl verdict unavailable (principal branch).
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
    /// The pipeline failed at this point.
    #[serde(rename = "ERROR")]
    Error,
}

impl Region {
    pub fn from_verdicts(pre: PreTwirl, post_csm: bool) -> Self {
        match (pre, post_csm) {
            (PreTwirl::Csm, false) => Region::Csmb,
            (PreTwirl::Csm, true) => Region::Csmc,
            (PreTwirl::NonCsm, true) => Region::Csmi,
            (PreTwirl::NonCsm, false) => Region::Ncsmc,
            (PreTwirl::Inconclusive, _) => Region::Inconclusive,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Region::Csmb => "CSMB",
            Region::Csmc => "CSMC",
            Region::Csmi => "CSMI",
            Region::Ncsmc => "nCSMC",
            Region::Inconclusive => "INCONCLUSIVE",
            Region::Error => "ERROR",
        }
    }
}

/// One classified grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub gamma_tg: f64,
    pub gammaphi_tg: f64,
    pub region: Region,
    /// Real parts of λ of the twirled channel (NaN on failure).
    pub lambda: QubitLambda,
    pub pretwirl: Option<PreTwirl>,
    /// Least eigenvalue of the pre-twirl Kossakowski matrix (NaN if unavailable).
    pub min_kossakowski_eig: f64,
    /// Failure message, if the pipeline failed at this point.
    pub error: Option<String>,
}

/// Grid over `[0, gamma_max] x [0, gammaphi_max]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_gamma: usize,
    pub n_gammaphi: usize,
    pub gamma_max: f64,
    pub gammaphi_max: f64,
    pub theta: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_gamma: 60, n_gammaphi: 60, gamma_max: 3.0, gammaphi_max: 3.0, theta: FRAC_PI_2 }
    }
}

impl GridSpec {
    fn axis(count: usize, max: f64) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..count).map(|i| max * i as f64 / (count - 1) as f64).collect(),
        }
    }

    pub fn gamma_axis(&self) -> Vec<f64> {
        Self::axis(self.n_gamma, self.gamma_max)
    }

    pub fn gammaphi_axis(&self) -> Vec<f64> {
        Self::axis(self.n_gammaphi, self.gammaphi_max)
    }

    fn validate(&self) -> Result<()> {
        if self.n_gamma == 0 || self.n_gammaphi == 0 {
            return Err(invalid("grid", "resolution must be at least 1x1"));
        }
        check_nonneg("gamma_max", self.gamma_max)?;
        check_nonneg("gammaphi_max", self.gammaphi_max)?;
        if !(self.theta > 0.0) {
            return Err(invalid("theta", "rotation angle must be positive"));
        }
        Ok(())
    }
}

/// Sweep output, points ordered with `γ_φt_g` outer and `γt_g` inner.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid: GridSpec,
    /// False when `ϑ` is not a multiple of `π/2` (twirling then has no
    /// Clifford-gate interpretation).
    pub clifford: bool,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn count(&self, region: Region) -> usize {
        self.points.iter().filter(|p| p.region == region).count()
    }

    /// Point closest to the given coordinates.
    pub fn nearest(&self, gamma_tg: f64, gammaphi_tg: f64) -> Option<&SweepPoint> {
        self.points.iter().min_by(|a, b| {
            let da = (a.gamma_tg - gamma_tg).powi(2) + (a.gammaphi_tg - gammaphi_tg).powi(2);
            let db = (b.gamma_tg - gamma_tg).powi(2) + (b.gammaphi_tg - gammaphi_tg).powi(2);
            da.total_cmp(&db)
        })
    }
}

/// Classifies one point: pre-twirl channel-log test × post-twirl λ signs.
pub fn classify_point(gamma_tg: f64, gammaphi_tg: f64, theta: f64) -> SweepPoint {
    let nan = QubitLambda { x: f64::NAN, y: f64::NAN, z: f64::NAN };
    let run = || -> Result<SweepPoint> {
        let e = rx_gate_unit_time(gamma_tg, gammaphi_tg, theta)?.error_channel()?;
        let (pre, min_eig) = pretwirl_verdict(&e)?;
        let pl = lambda_from_f(twirl(&e)?.eigenvalues())?;
        let lambda = QubitLambda { x: pl.lambda_re("X"), y: pl.lambda_re("Y"), z: pl.lambda_re("Z") };
        let post = classify_pl(pl, DEFAULT_CSM_TOL)?;
        Ok(SweepPoint {
            gamma_tg,
            gammaphi_tg,
            region: Region::from_verdicts(pre, post.is_csm),
            lambda,
            pretwirl: Some(pre),
            min_kossakowski_eig: min_eig,
            error: None,
        })
    };
    run().unwrap_or_else(|e| SweepPoint {
        gamma_tg,
        gammaphi_tg,
        region: Region::Error,
        lambda: nan,
        pretwirl: None,
        min_kossakowski_eig: f64::NAN,
        error: Some(e.to_string()),
    })
}

/// Phase diagram of the rotation gate. Points are evaluated in parallel on
/// the current rayon pool; output order is deterministic.
pub fn sweep_phase_diagram(grid: GridSpec) -> Result<SweepResult> {
    grid.validate()?;
    let gammas = grid.gamma_axis();
    let coords: Vec<(f64, f64)> =
        grid.gammaphi_axis().into_iter().flat_map(|gp| gammas.iter().map(move |&g| (g, gp))).collect();
    let points = coords.into_par_iter().map(|(g, gp)| classify_point(g, gp, grid.theta)).collect();
    let m = grid.theta / FRAC_PI_2;
    Ok(SweepResult { grid, clifford: (m - m.round()).abs() < 1e-12, points })
}

/// Convenience: the f-vector diagonal of a transfer matrix.
pub fn transfer_diagonal(t: &RMatrix) -> DVector<f64> {
    t.diagonal()
}

/// Summary of one worked example, as printed by the `demo` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoReport {
    pub scenario: Scenario,
    pub gamma_t: f64,
    pub gammaphi_t: f64,
    pub theta: Option<f64>,
    /// False for rotation angles that are not multiples of π/2.
    pub clifford: bool,
    /// λ of the twirled channel from the numeric pipeline.
    pub lambda: QubitLambda,
    /// Closed form (Hadamard) or second-order expansion (rotation gate).
    pub reference: QubitLambda,
    /// CSM verdict of the twirled channel.
    pub is_csm: bool,
    pub min_lambda: f64,
    /// Small-rate criterion for twirling to break CSM.
    pub criterion: bool,
    pub pretwirl: Option<PreTwirl>,
    pub region: Option<Region>,
}

pub fn demo_hadamard(gammaphi_t: f64, gamma_t: f64) -> Result<DemoReport> {
    let lambda = hadamard_lambda_numeric(gammaphi_t, gamma_t)?;
    let verdict = classify_pl(lambda.to_params(), DEFAULT_CSM_TOL)?;
    Ok(DemoReport {
        scenario: Scenario::Hadamard,
        gamma_t,
        gammaphi_t,
        theta: None,
        clifford: true,
        lambda,
        reference: hadamard_dephasing_relaxation_lambda(gammaphi_t, gamma_t)?,
        is_csm: verdict.is_csm,
        min_lambda: verdict.min_value,
        criterion: csmb_criterion(gamma_t, gammaphi_t, Scenario::Hadamard),
        pretwirl: None,
        region: None,
    })
}

pub fn demo_rx(gamma_tg: f64, gammaphi_tg: f64, theta: f64) -> Result<DemoReport> {
    let point = classify_point(gamma_tg, gammaphi_tg, theta);
    if let Some(msg) = point.error {
        return Err(invalid("demo", msg));
    }
    let m = theta / FRAC_PI_2;
    Ok(DemoReport {
        scenario: Scenario::Sqrtx,
        gamma_t: gamma_tg,
        gammaphi_t: gammaphi_tg,
        theta: Some(theta),
        clifford: (m - m.round()).abs() < 1e-12,
        lambda: point.lambda,
        reference: sqrtx_lambda_second_order(gamma_tg, gammaphi_tg, theta)?,
        is_csm: point.lambda.min() >= -DEFAULT_CSM_TOL,
        min_lambda: point.lambda.min(),
        criterion: csmb_criterion(gamma_tg, gammaphi_tg, Scenario::Sqrtx),
        pretwirl: point.pretwirl,
        region: Some(point.region),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::propagate_timedep;

    #[test]
    fn demo_reports() {
        let r = demo_hadamard(1.0, 0.0).unwrap();
        assert!(!r.is_csm);
        assert!(r.lambda.max_abs_diff(&r.reference) < 1e-10);
        assert!((r.lambda.y + 0.216895).abs() < 1e-5);
        let r = demo_rx(0.001, 0.1, FRAC_PI_2).unwrap();
        assert_eq!(r.region, Some(Region::Csmb));
        assert!(r.clifford && r.criterion && !r.is_csm);
        assert!(!demo_rx(0.01, 0.1, 1.0).unwrap().clifford);
    }

    #[test]
    fn hadamard_closed_forms() {
        assert_eq!(hadamard_dephasing_lambda(0.0).unwrap(), QubitLambda { x: 0.0, y: 0.0, z: 0.0 });
        let l = hadamard_dephasing_lambda(1.0).unwrap();
        assert_eq!(l.x, 0.5);
        assert!((l.y + 0.216895).abs() < 1e-5);
        assert!(hadamard_dephasing_lambda(-0.1).is_err());

        let l = hadamard_dephasing_relaxation_lambda(0.2, 0.01).unwrap();
        assert!((l.y - (0.0025 - 0.5 * 0.1975f64.cosh().ln())).abs() < 1e-16);
        assert!((l.y + 0.007179).abs() < 2e-5, "{}", l.y);
        let l = hadamard_dephasing_relaxation_lambda(0.2, 0.1).unwrap();
        assert!((l.y - (0.025 - 0.5 * 0.175f64.cosh().ln())).abs() < 1e-16);
        assert!((l.y - 0.017375).abs() < 2e-5, "{}", l.y);
        for x in [0.0, 0.3, 1.7] {
            assert_eq!(hadamard_dephasing_relaxation_lambda(x, 0.0).unwrap(), hadamard_dephasing_lambda(x).unwrap());
        }
    }

    #[test]
    fn hadamard_numeric_matches_closed_form() {
        for x in [0.1, 0.5, 1.0, 2.0] {
            let a = hadamard_lambda_numeric(x, 0.0).unwrap();
            assert!(a.max_abs_diff(&hadamard_dephasing_lambda(x).unwrap()) < 1e-10);
        }
        for (x, y) in [(0.2, 0.01), (0.2, 0.1), (0.7, 0.9)] {
            let a = hadamard_lambda_numeric(x, y).unwrap();
            assert!(a.max_abs_diff(&hadamard_dephasing_relaxation_lambda(x, y).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn noise_rates_from_times() {
        let r = NoiseRates::from_times(100.0, 50.0).unwrap();
        assert!((r.gamma - 0.01).abs() < 1e-15);
        assert!((r.gamma_phi - 0.015).abs() < 1e-15);
        let (gt, gpt) = r.times(0.05);
        assert!((gt - 5e-4).abs() < 1e-15 && (gpt - 7.5e-4).abs() < 1e-15);
        assert!(NoiseRates::from_times(10.0, 30.0).is_err());
        assert_eq!(NoiseRates::from_times(10.0, 20.0).unwrap().gamma_phi, 0.0);
        assert!(NoiseRates::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn rx_setup_examples() {
        let gate = rx_gate_unit_time(0.0, 0.0, FRAC_PI_2).unwrap();
        let e = gate.error_channel().unwrap();
        assert!(linalg::max_abs_real(&(e.transfer() - RMatrix::identity(4, 4))) < 1e-14);
        assert!(gate.is_clifford());
        assert!(!rx_gate_unit_time(0.0, 0.0, 1.0).unwrap().is_clifford());

        let (g, gp) = (0.3, 0.7);
        let k = relaxation_dephasing_kossakowski(NoiseRates::new(g, gp).unwrap());
        let ev = linalg::hermitian_eigenvalues(&k);
        let mut expect = [0.0, g / 2.0, gp];
        expect.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(rx_gate_setup(NoiseRates::new(0.1, 0.1).unwrap(), 0.0, 1.0).is_err());
    }

    #[test]
    fn rx_physical_time_units_agree() {
        // A = π/(2 t_g) with rates per unit time
        let t_g = 0.04;
        let rates = NoiseRates::new(0.5, 2.0).unwrap();
        let gate = rx_gate_setup(rates, FRAC_PI_2 / t_g, t_g).unwrap();
        let e = gate.error_channel().unwrap();
        let a = QubitLambda::from_params(&lambda_from_f(twirl(&e).unwrap().eigenvalues()).unwrap()).unwrap();
        let (gt, gpt) = rates.times(t_g);
        let b = sqrtx_lambda_numeric(gt, gpt).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
    }

    #[test]
    fn sigma_minus_convention_is_irrelevant() {
        // Methods matrix vs explicit σ₋ jump: same twirled λ and verdicts
        for (g, gp) in [(0.3, 0.2), (0.001, 0.1), (1.2, 2.5)] {
            let h = pauli("X") * c(FRAC_PI_4_HALF);
            let jumps = [(gp, pauli("Z")), (g, sigma_minus())];
            let lab = LindbladGenerator::from_jumps(h.clone(), &jumps).unwrap();
            let ctx = GateContext::from_hamiltonian(&h, 1.0).unwrap();
            let e = error_channel(&propagate_constant(&lab, 1.0).unwrap(), &ctx).unwrap();
            let a = QubitLambda::from_params(&lambda_from_f(twirl(&e).unwrap().eigenvalues()).unwrap()).unwrap();
            let b = sqrtx_lambda_numeric(g, gp).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12);
            let e2 = rx_gate_unit_time(g, gp, FRAC_PI_2).unwrap().error_channel().unwrap();
            assert_eq!(pretwirl_verdict(&e).unwrap().0, pretwirl_verdict(&e2).unwrap().0);
        }
    }

    const FRAC_PI_4_HALF: f64 = std::f64::consts::FRAC_PI_4;

    #[test]
    fn sqrtx_exact_yz() {
        let l = sqrtx_lambda_numeric(0.0, 0.0).unwrap();
        assert!(l.max_abs_diff(&QubitLambda { x: 0.0, y: 0.0, z: 0.0 }) < 1e-15);
        let l = sqrtx_lambda_numeric(0.001, 0.1).unwrap();
        assert!((l.y - 0.050125).abs() < 1e-10);
        assert!((l.z - 0.050125).abs() < 1e-10);
        assert!(l.x < 0.0);
        let so = sqrtx_lambda_second_order(0.001, 0.1, FRAC_PI_2).unwrap();
        assert!((so.x - (0.00025 - (0.09975f64).powi(2) / std::f64::consts::PI.powi(2))).abs() < 1e-15);
        assert!((so.x + 7.58e-4).abs() < 1e-6);
        assert!((l.x - so.x).abs() < 1e-5, "{} vs {}", l.x, so.x);
    }

    #[test]
    fn second_order_special_cases() {
        let l = sqrtx_lambda_second_order(0.4, 0.1, 0.9).unwrap();
        assert_eq!(l.x, 0.1);
        let l = sqrtx_lambda_second_order(0.2, 0.3, FRAC_PI_2).unwrap();
        assert!((l.y - (0.2 / 8.0 + 0.15)).abs() < 1e-15);
        assert!((l.z - l.y).abs() < 1e-15);
        assert!(sqrtx_lambda_second_order(0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn second_order_error_scaling() {
        let err = |g: f64, gp: f64| {
            let n = sqrtx_lambda_numeric(g, gp).unwrap();
            let s = sqrtx_lambda_second_order(g, gp, FRAC_PI_2).unwrap();
            (n.x - s.x).abs()
        };
        // the residual of the λ_x expansion is fourth order: halving both
        // rates divides it by 16, and it vanishes on γ_φ = γ/4
        let ratio = err(0.04, 0.04) / err(0.02, 0.02);
        assert!((ratio - 16.0).abs() < 0.05, "{ratio}");
        assert!(err(0.04, 0.01) < 1e-15);
    }

    #[test]
    fn second_order_general_theta() {
        // third-order agreement away from ϑ = π/2 too
        for theta in [0.7, 2.0] {
            let n = rx_lambda_numeric(0.01, 0.02, theta).unwrap();
            let s = sqrtx_lambda_second_order(0.01, 0.02, theta).unwrap();
            assert!(n.max_abs_diff(&s) < 2e-5, "{theta}: {n:?} {s:?}");
        }
    }

    #[test]
    fn cumulant_examples() {
        let td = RMatrix::from_diagonal(&DVector::from_vec(vec![0.0, -0.2, -0.3, -0.1]));
        let (c1, c2) = cumulant_c1_c2(&RMatrix::zeros(4, 4), &td, 2.0, 6).unwrap();
        assert!(linalg::max_abs_real(&(c1 - &td * 2.0)) < 1e-14);
        assert!(linalg::max_abs_real(&c2) < 1e-16);
        assert!(cumulant_c1_c2(&RMatrix::zeros(4, 4), &td, 1.0, 3).is_err());

        let a = rx_lambda_cumulant(0.01, 0.01, FRAC_PI_2, 8).unwrap();
        let b = rx_lambda_cumulant(0.01, 0.01, FRAC_PI_2, 16).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        let s = sqrtx_lambda_second_order(0.01, 0.01, FRAC_PI_2).unwrap();
        assert!(a.max_abs_diff(&s) < 1e-5, "{a:?} {s:?}");
    }

    #[test]
    fn criterion_examples() {
        assert!(csmb_criterion(0.001, 0.1, Scenario::Sqrtx));
        assert!(!csmb_criterion(0.01, 0.1, Scenario::Sqrtx));
        assert!(!csmb_criterion(0.1, 0.0, Scenario::Sqrtx));
        assert!(!csmb_criterion(0.1, 0.0, Scenario::Hadamard));
        // Hadamard: λ_y < 0 iff criterion, away from the boundary
        for (x, y) in [(0.2, 0.01), (0.2, 0.1), (0.1, 0.001), (0.3, 0.2)] {
            let neg = hadamard_dephasing_relaxation_lambda(x, y).unwrap().y < 0.0;
            assert_eq!(neg, csmb_criterion(y, x, Scenario::Hadamard), "{x} {y}");
        }
    }

    #[test]
    fn crossing_tracks_second_order_curve() {
        for gp in [0.05, 0.1, 0.2, 0.3] {
            let numeric = lambda_x_zero_crossing(gp, FRAC_PI_2).unwrap().unwrap();
            let so = second_order_crossing(gp, FRAC_PI_2).unwrap();
            // the root satisfies γ = (2/π)² (γ_φ - γ/4)²
            assert!((so - (2.0 / std::f64::consts::PI).powi(2) * (gp - so / 4.0).powi(2)).abs() < 1e-15);
            assert!(((numeric - so) / so).abs() < 0.1, "{gp}: {numeric} vs {so}");
        }
        assert_eq!(lambda_x_zero_crossing(0.0, FRAC_PI_2).unwrap(), None);
    }

    #[test]
    fn pretwirl_threshold_near_two() {
        let b = pretwirl_boundary(0.0, 0.0, 3.0, 30, FRAC_PI_2).unwrap().unwrap();
        assert!((1.9..2.3).contains(&b), "{b}");
        assert_eq!(pretwirl_boundary(0.5, 0.0, 1.5, 10, FRAC_PI_2).unwrap(), None);
    }

    #[test]
    fn lab_and_gate_frame_routes_agree() {
        let gate = rx_gate_unit_time(0.3, 0.5, FRAC_PI_2).unwrap();
        let exact = gate.error_channel().unwrap();
        let stepped = propagate_timedep(&gate.gate_frame().unwrap(), 1.0, 4000).unwrap();
        let diff = linalg::max_abs_real(&(exact.transfer() - stepped.transfer()));
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn gate_frame_timedep_is_second_order() {
        let gate = rx_gate_unit_time(0.3, 0.5, FRAC_PI_2).unwrap();
        let td = gate.gate_frame().unwrap();
        let e = |steps| propagate_timedep(&td, 1.0, steps).unwrap().transfer().clone();
        let (a, b, cc) = (e(500), e(1000), e(2000));
        let order = (linalg::max_abs_real(&(&a - &b)) / linalg::max_abs_real(&(&b - &cc))).log2();
        assert!(order >= 1.9, "{order}");
    }

    #[test]
    fn sweep_points() {
        assert_eq!(classify_point(0.001, 0.1, FRAC_PI_2).region, Region::Csmb);
        assert_eq!(classify_point(0.5, 0.1, FRAC_PI_2).region, Region::Csmc);
        let p = classify_point(0.0, 0.0, FRAC_PI_2);
        assert_eq!(p.region, Region::Csmc);
        // γ_φ = γ/4 gives a triply degenerate transfer spectrum
        let p = classify_point(3.0, 0.75, FRAC_PI_2);
        assert_eq!(p.pretwirl, Some(PreTwirl::Csm), "{p:?}");

        let grid = GridSpec { n_gamma: 4, n_gammaphi: 3, gamma_max: 1.0, gammaphi_max: 0.5, theta: FRAC_PI_2 };
        let r = sweep_phase_diagram(grid).unwrap();
        assert_eq!(r.points.len(), 12);
        assert_eq!(r.points[0].gamma_tg, 0.0);
        assert_eq!(r.points[3].gamma_tg, 1.0);
        assert_eq!(r.points[4].gammaphi_tg, 0.25);
        assert!(r.clifford);
        assert_eq!(r, sweep_phase_diagram(grid).unwrap());
        assert!(sweep_phase_diagram(GridSpec { n_gamma: 0, ..grid }).is_err());
    }
}
