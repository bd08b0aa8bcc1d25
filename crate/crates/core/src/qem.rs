//! Noise scaling and sampling for error mitigation with PL channels.
//!
//! The power `(e^L)^β` has parameters `βλ` and factorizes over the support
//! as `∘_a (w_a · id + (1 - w_a) 𝒫_a)` with `w_a = (1 + e^{-2βλ_a})/2`.
//! For `w ≤ 1` each factor is a probability mixture. For `w > 1` it is
//! rewritten as `(2w - 1)[ w/(2w-1) · id - (w-1)/(2w-1) · 𝒫_a ]`, a
//! quasi-probability with overhead `2w - 1` and a sign flip on `𝒫_a`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};
use crate::pauli::{sympl_index, walsh_hadamard, PauliWord};
use crate::plmodel::PLParams;
use crate::superop;

/// Largest support for the brute-force [`expected_map`].
pub const MAX_ORACLE_SUPPORT: usize = 16;
/// Shots are split into this many independently seeded streams.
pub const SAMPLER_STREAMS: u64 = 64;

/// `λ' = βλ`. Complex parameters are rejected.
pub fn power_lambda(pl: &PLParams, beta: f64) -> Result<PLParams> {
    pl.real_values()?;
    Ok(pl.scaled(beta))
}

/// Sampling data for one support word.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub word: PauliWord,
    pub lambda_prime: f64,
    pub w: f64,
    pub gamma_factor: f64,
    pub flip_probability: f64,
    pub sign_on_flip: i8,
}

impl PlanEntry {
    fn new(word: PauliWord, lambda_prime: f64) -> Self {
        let w = 0.5 * (1.0 + (-2.0 * lambda_prime).exp());
        if lambda_prime >= 0.0 {
            Self { word, lambda_prime, w, gamma_factor: 1.0, flip_probability: 1.0 - w, sign_on_flip: 1 }
        } else {
            let gamma_factor = 2.0 * w - 1.0;
            Self { word, lambda_prime, w, gamma_factor, flip_probability: (w - 1.0) / gamma_factor, sign_on_flip: -1 }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub n: usize,
    pub beta: f64,
    pub entries: Vec<PlanEntry>,
    /// Product of the per-entry overheads; 1 when all `λ' ≥ 0`.
    pub total_gamma: f64,
}

pub fn build_plan(pl: &PLParams, beta: f64) -> Result<SamplingPlan> {
    let scaled = power_lambda(pl, beta)?;
    let entries: Vec<PlanEntry> =
        scaled.real_values()?.into_iter().map(|(w, l)| PlanEntry::new(w, l)).collect();
    let total_gamma = entries.iter().map(|e| e.gamma_factor).product();
    Ok(SamplingPlan { n: pl.n(), beta, entries, total_gamma })
}

/// Draws one Pauli word and its sign. Phases of the word products are
/// dropped since only the conjugation `P ρ P` is used.
pub fn sample_word<R: Rng + ?Sized>(plan: &SamplingPlan, rng: &mut R) -> (PauliWord, i8) {
    let (mut x, mut z) = (0u64, 0u64);
    let mut sign = 1i8;
    for e in &plan.entries {
        if rng.random::<f64>() < e.flip_probability {
            x ^= e.word.x_bits();
            z ^= e.word.z_bits();
            sign *= e.sign_on_flip;
        }
    }
    (PauliWord::from_bits(plan.n, x, z).expect("bits within n"), sign)
}

/// Exact average of the sampler: sum over all `2^|S|` flip patterns of
/// `total_gamma · sign · probability · 𝒫_word`.
pub fn expected_map(plan: &SamplingPlan) -> Result<Channel> {
    let s = plan.entries.len();
    if s > MAX_ORACLE_SUPPORT {
        return Err(invalid("support", format!("brute force limited to {MAX_ORACLE_SUPPORT} words, got {s}")));
    }
    let n = plan.n;
    let len = 1usize << (2 * n);
    let mut diag = vec![0.0; len];
    for mask in 0u64..(1u64 << s) {
        let (mut x, mut z) = (0u64, 0u64);
        let mut weight = plan.total_gamma;
        for (i, e) in plan.entries.iter().enumerate() {
            if mask >> i & 1 == 1 {
                x ^= e.word.x_bits();
                z ^= e.word.z_bits();
                weight *= e.flip_probability * e.sign_on_flip as f64;
            } else {
                weight *= 1.0 - e.flip_probability;
            }
        }
        let c = PauliWord::from_bits(n, x, z)?.index();
        for (a, d) in diag.iter_mut().enumerate() {
            *d += if sympl_index(n, a, c) == 1 { -weight } else { weight };
        }
    }
    Channel::from_transfer(n, RMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub total_gamma: f64,
    pub shots: u64,
}

#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `tr[O P_a σ P_a]` for every word `a`.
fn conjugated_expectations(n: usize, sigma: &CMatrix, observable: &CMatrix) -> Vec<f64> {
    let d = 1usize << n;
    let coeff = |m: &CMatrix, a: usize| -> Complex64 {
        PauliWord::from_index(n, a).expect("in range").entries().into_iter().map(|(r, c, v)| v * m[(c, r)]).sum()
    };
    let prod: Vec<f64> = (0..d * d).map(|b| (coeff(observable, b) * coeff(sigma, b)).re / d as f64).collect();
    walsh_hadamard(n, &prod)
}

/// Samples `sign · total_gamma · tr[O P (𝓒(ρ)) P]` with `P` drawn from the
/// plan for the power `β` of the PL model `pl`, where `𝓒` is the channel
/// under test. Shots are split over [`SAMPLER_STREAMS`] streams seeded from
/// `seed`; the result does not depend on the thread count.
pub fn mitigation_estimate(
    channel: &Channel,
    pl: &PLParams,
    beta: f64,
    rho: &CMatrix,
    observable: &CMatrix,
    shots: u64,
    seed: u64,
) -> Result<Estimate> {
    let n = channel.n();
    if pl.n() != n {
        return Err(Error::SizeMismatch { left: n, right: pl.n() });
    }
    let d = 1usize << n;
    for (what, m) in [("state", rho), ("observable", observable)] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Shape(format!("{what} must be {d}x{d}")));
        }
        let residue = linalg::hermitian_residue(m);
        if residue > 1e-10 * linalg::max_abs(m).max(1.0) {
            return Err(Error::NotHermitian { what, residue });
        }
    }
    if shots < 2 {
        return Err(invalid("shots", "need at least 2 shots"));
    }
    superop::qubits_for_dim(d)?;
    let plan = build_plan(pl, beta)?;
    let values = conjugated_expectations(n, &channel.apply(rho)?, observable);

    let per = shots / SAMPLER_STREAMS;
    let extra = shots % SAMPLER_STREAMS;
    let sums: Vec<(Neumaier, Neumaier)> = (0..SAMPLER_STREAMS)
        .into_par_iter()
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let count = per + u64::from(stream < extra);
            let (mut s1, mut s2) = (Neumaier::default(), Neumaier::default());
            for _ in 0..count {
                let (word, sign) = sample_word(&plan, &mut rng);
                let v = plan.total_gamma * sign as f64 * values[word.index()];
                s1.add(v);
                s2.add(v * v);
            }
            (s1, s2)
        })
        .collect();
    let (mut s1, mut s2) = (Neumaier::default(), Neumaier::default());
    for (a, b) in &sums {
        s1.add(a.value());
        s2.add(b.value());
    }
    let m = shots as f64;
    let mean = s1.value() / m;
    let var = ((s2.value() - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(Estimate { estimate: mean, stderr: (var / m).sqrt(), total_gamma: plan.total_gamma, shots })
}
