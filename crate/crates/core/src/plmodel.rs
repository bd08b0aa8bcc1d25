//! Generalized Pauli-Lindblad (PL) parameterization of Pauli channels.
//!
//! A PL map is `e^L` with `L(ρ) = Σ_{a∈S} λ_a (P_a ρ P_a - ρ)`. Its Pauli
//! eigenvalues are `f_a = exp(-2 Σ_k λ_k <a,k>)`, and for `f` with no zero
//! entry the parameters are recovered (principal branch) as
//! `λ_a = 4^-n Σ_{k≠0} (-1)^<a,k> Ln f_k`. A Pauli channel is channel
//! semigroup Markovian (CSM) exactly when every such `λ_a` is real and
//! nonnegative; negative parameters are allowed here and can still describe
//! perfectly valid channels.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::PauliChannel;
use crate::error::{invalid, Error, Result};
use crate::pauli::{check_cap, sympl_index, walsh_hadamard, PauliVector, PauliWord, MAX_VECTOR_QUBITS};

/// Default tolerance for "negative λ" verdicts.
pub const DEFAULT_CSM_TOL: f64 = 1e-10;
/// `|f_k|` at or below this is treated as zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-14;

/// PL parameters on a support set of non-identity words. Off-support
/// parameters are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PLParams {
    n: usize,
    terms: BTreeMap<PauliWord, Complex64>,
}

impl PLParams {
    /// Empty support: the identity map.
    pub fn zero(n: usize) -> Result<Self> {
        check_cap("PLParams", n, MAX_VECTOR_QUBITS)?;
        Ok(Self { n, terms: BTreeMap::new() })
    }

    pub fn new(n: usize, terms: impl IntoIterator<Item = (PauliWord, Complex64)>) -> Result<Self> {
        let mut out = Self::zero(n)?;
        let branch_unit = std::f64::consts::PI / (1u64 << (2 * n)) as f64;
        for (word, lambda) in terms {
            if word.n() != n {
                return Err(Error::SizeMismatch { left: n, right: word.n() });
            }
            if word.is_identity() {
                return Err(invalid("support", "the identity word cannot carry a PL parameter"));
            }
            let k = lambda.im / branch_unit;
            if (k - k.round()).abs() > 1e-9 * k.abs().max(1.0) {
                return Err(invalid(
                    "lambda",
                    format!("imaginary part of λ[{word}] is not a multiple of π/4^n"),
                ));
            }
            if out.terms.insert(word, lambda).is_some() {
                return Err(invalid("support", format!("duplicate word {word}")));
            }
        }
        Ok(out)
    }

    /// Real parameters from `(label, value)` pairs.
    pub fn from_labels<'a>(n: usize, terms: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let parsed = terms
            .into_iter()
            .map(|(l, v)| Ok((PauliWord::from_label(l)?, Complex64::new(v, 0.0))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, parsed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Support words in canonical order.
    pub fn support(&self) -> impl Iterator<Item = &PauliWord> {
        self.terms.keys()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliWord, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// λ for `word` (zero off the support).
    pub fn lambda(&self, word: &PauliWord) -> Complex64 {
        self.terms.get(word).copied().unwrap_or_default()
    }

    /// Real part of λ for a label; panics on a malformed label.
    pub fn lambda_re(&self, label: &str) -> f64 {
        self.lambda(&PauliWord::from_label(label).expect("valid label")).re
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.terms.values().all(|l| l.im.abs() <= tol)
    }

    /// Real parameters, rejecting any with a nonzero imaginary part.
    pub fn real_values(&self) -> Result<Vec<(PauliWord, f64)>> {
        self.terms
            .iter()
            .map(|(w, l)| {
                if l.im != 0.0 {
                    Err(Error::ComplexLambda { word: w.label() })
                } else {
                    Ok((*w, l.re))
                }
            })
            .collect()
    }

    pub fn scaled(&self, beta: f64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(w, l)| (*w, l * beta)).collect(),
        }
    }
}

/// `f_a = exp(-2 Σ_k λ_k <a,k>)`, complex in general.
pub fn f_from_lambda(pl: &PLParams) -> PauliVector<Complex64> {
    let n = pl.n;
    let len = 1usize << (2 * n);
    let support: Vec<(usize, Complex64)> = pl.terms.iter().map(|(w, l)| (w.index(), *l)).collect();
    let values = (0..len)
        .map(|a| {
            let exponent: Complex64 = support
                .iter()
                .filter(|(k, _)| sympl_index(n, a, *k) == 1)
                .map(|(_, l)| *l)
                .sum();
            (exponent * -2.0).exp()
        })
        .collect();
    PauliVector::new(n, values).expect("length 4^n")
}

/// Real Pauli eigenvalues of a PL map; errors when the map is not
/// Hermiticity-preserving (imaginary part above `1e-12`).
pub fn f_from_lambda_real(pl: &PLParams) -> Result<PauliVector> {
    let f = f_from_lambda(pl);
    let residue = f.values().iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
    if residue > 1e-12 {
        return Err(Error::NotHermiticityPreserving { residue });
    }
    PauliVector::new(pl.n, f.values().iter().map(|z| z.re).collect())
}

/// Inverts [`f_from_lambda`] on the principal branch. Full support.
pub fn lambda_from_f(f: &PauliVector) -> Result<PLParams> {
    let n = f.n();
    let logs = f
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if v.abs() <= ZERO_EIGENVALUE_TOL {
                return Err(Error::IllDefinedLambda {
                    word: crate::pauli::index_label(n, k),
                    value: v,
                });
            }
            Ok(if k == 0 { Complex64::default() } else { Complex64::new(v, 0.0).ln() })
        })
        .collect::<Result<Vec<_>>>()?;
    lambda_from_log_f(n, &logs)
}

/// λ from `g_k = Ln f_k` (the identity entry `g_0` is ignored):
/// `λ_a = 4^-n Σ_{k≠0} (-1)^<a,k> g_k`.
pub fn lambda_from_log_f(n: usize, logs: &[Complex64]) -> Result<PLParams> {
    check_cap("PLParams", n, MAX_VECTOR_QUBITS)?;
    if logs.len() != 1usize << (2 * n) {
        return Err(Error::SizeMismatch { left: 1usize << (2 * n), right: logs.len() });
    }
    let mut logs = logs.to_vec();
    logs[0] = Complex64::default();
    let scale = 1.0 / logs.len() as f64;
    let lambda = walsh_hadamard(n, &logs);
    let terms = lambda
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(a, l)| {
            let l = l * scale;
            // Re-snap: for real f the imaginary part is an integer multiple of π/4^n.
            let unit = std::f64::consts::PI * scale;
            let snapped = Complex64::new(l.re, (l.im / unit).round() * unit);
            (PauliWord::from_index(n, a).expect("in range"), snapped)
        });
    PLParams::new(n, terms)
}

/// The PL map `e^L` as a Pauli channel. Negative λ are allowed: the result
/// may fail complete positivity, which [`PauliChannel::is_cptp`] reports.
pub fn pl_channel(pl: &PLParams) -> Result<PauliChannel> {
    Ok(PauliChannel::from_eigenvalues(f_from_lambda_real(pl)?))
}

/// What a [`CsmVerdict`] rests on.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// PL parameters of a Pauli channel.
    Lambda(PLParams),
    /// Kossakowski spectrum of the principal logarithm (general channels).
    KossakowskiSpectrum(Vec<f64>),
}

/// Channel-semigroup-Markovianity classification.
#[derive(Debug, Clone, PartialEq)]
pub struct CsmVerdict {
    pub is_csm: bool,
    pub witness: Witness,
    /// Smallest real λ or Kossakowski eigenvalue; `-inf` when a λ has a
    /// nonzero imaginary part or the logarithm is not Hermiticity-preserving.
    pub min_value: f64,
    pub tol: f64,
}

/// CSM verdict for a Pauli channel from its eigenvalues.
pub fn classify_pauli(f: &PauliVector, tol: f64) -> Result<CsmVerdict> {
    classify_pl(lambda_from_f(f)?, tol)
}

/// CSM verdict from PL parameters: CSM iff all λ are real and ≥ -tol.
pub fn classify_pl(pl: PLParams, tol: f64) -> Result<CsmVerdict> {
    if !(tol > 0.0) {
        return Err(invalid("tol", "tolerance must be positive"));
    }
    let complex = pl.terms.values().any(|l| l.im.abs() > tol);
    let min_re = pl.terms.values().map(|l| l.re).fold(f64::INFINITY, f64::min);
    let min_re = if min_re.is_finite() { min_re } else { 0.0 };
    let min_value = if complex { f64::NEG_INFINITY } else { min_re };
    Ok(CsmVerdict { is_csm: min_value >= -tol, witness: Witness::Lambda(pl), min_value, tol })
}

/// Single-qubit CSM criterion `f_j ≥ f_k f_l` for every permutation of
/// `(x, y, z)`. Requires all `f` positive.
pub fn qubit_criterion(f: &PauliVector) -> Result<bool> {
    if f.n() != 1 {
        return Err(invalid("f", "the qubit criterion needs n = 1"));
    }
    if f.values().iter().any(|&v| v <= 0.0) {
        return Err(invalid("f", "the qubit criterion needs all Pauli eigenvalues positive"));
    }
    let fx = f.at("X")?;
    let fy = f.at("Y")?;
    let fz = f.at("Z")?;
    Ok(fx >= fy * fz && fy >= fx * fz && fz >= fx * fy)
}

/// Smallest third PL parameter a qubit Pauli channel can have when the
/// other two equal `ell`: `-½ ln cosh(2 ell)`.
pub fn min_third_parameter(ell: f64) -> Result<f64> {
    if !(ell >= 0.0) {
        return Err(invalid("ell", "must be nonnegative"));
    }
    Ok(-0.5 * (2.0 * ell).cosh().ln())
}

/// One measured Pauli eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub word: PauliWord,
    pub value: f64,
    /// Standard deviation; weight `1/σ²` when present and positive, else 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: PLParams,
    /// Weighted sum of squared log-residuals at the optimum.
    pub residual: f64,
}

/// Weighted least-squares fit of λ on `support` to measured eigenvalues,
/// linear after taking logs: minimizes
/// `Σ_a w_a (ln f_a + 2 Σ_k λ_k <a,k>)²`. With `allow_negative = false` the
/// problem is solved under `λ ≥ 0` (nonnegative least squares).
pub fn fit_sparse_lambda(
    measurements: &[Measurement],
    support: &[PauliWord],
    allow_negative: bool,
) -> Result<FitResult> {
    let first = support.first().ok_or_else(|| invalid("support", "empty support"))?;
    let n = first.n();
    for w in support {
        if w.n() != n {
            return Err(Error::SizeMismatch { left: n, right: w.n() });
        }
        if w.is_identity() {
            return Err(invalid("support", "identity word in support"));
        }
    }
    let rows = measurements.len();
    let cols = support.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    let mut sqrt_w = DVector::<f64>::zeros(rows);
    for (i, m) in measurements.iter().enumerate() {
        if m.word.n() != n {
            return Err(Error::SizeMismatch { left: n, right: m.word.n() });
        }
        if !(m.value > 0.0) {
            return Err(Error::NonPositiveMeasurement { word: m.word.label(), value: m.value });
        }
        let weight = match m.sigma {
            Some(s) if s > 0.0 => 1.0 / (s * s),
            _ => 1.0,
        };
        sqrt_w[i] = weight.sqrt();
        for (k, word) in support.iter().enumerate() {
            if sympl_index(n, m.word.index(), word.index()) == 1 {
                a[(i, k)] = 2.0 * sqrt_w[i];
            }
        }
        b[i] = -m.value.ln() * sqrt_w[i];
    }

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |acc, &s| acc.max(s));
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax.max(1e-300)).count();
    if rank < cols {
        return Err(Error::RankDeficient { rank, unknowns: cols });
    }

    let x = if allow_negative {
        svd.solve(&b, 1e-14 * smax).map_err(|e| invalid("fit", e))?
    } else {
        nnls(&a, &b)?
    };
    let r = &a * &x - &b;
    let residual = r.dot(&r);
    let params = PLParams::new(
        n,
        support.iter().zip(x.iter()).map(|(w, &l)| (*w, Complex64::new(l, 0.0))),
    )?;
    Ok(FitResult { params, residual })
}

fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |acc, &s| acc.max(s));
    svd.solve(b, 1e-14 * smax.max(1e-300)).map_err(|e| invalid("fit", e))
}

/// Lawson-Hanson active-set nonnegative least squares.
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let cols = a.ncols();
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())) * b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let tol = 1e-12 * scale.max(1.0) * cols as f64;
    let mut x = DVector::<f64>::zeros(cols);
    let mut passive = vec![false; cols];

    let solve_passive = |passive: &[bool]| -> Result<DVector<f64>> {
        let idx: Vec<usize> = (0..cols).filter(|&j| passive[j]).collect();
        let sub = a.select_columns(&idx);
        let sol = lstsq(&sub, b)?;
        let mut full = DVector::<f64>::zeros(cols);
        for (k, &j) in idx.iter().enumerate() {
            full[j] = sol[k];
        }
        Ok(full)
    };

    for _outer in 0..3 * cols + 10 {
        let grad = a.transpose() * (b - a * &x);
        let candidate = (0..cols)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let j = match candidate {
            Some(j) if grad[j] > tol => j,
            _ => return Ok(x),
        };
        passive[j] = true;
        loop {
            let s = solve_passive(&passive)?;
            let infeasible: Vec<usize> = (0..cols).filter(|&i| passive[i] && s[i] <= 0.0).collect();
            if infeasible.is_empty() {
                x = s;
                break;
            }
            let alpha = infeasible
                .iter()
                .map(|&i| x[i] / (x[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            x += (s - &x) * alpha;
            for i in 0..cols {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Tolerances;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn f1(vals: [f64; 3]) -> PauliVector {
        // labels X, Y, Z -> canonical order I, X, Z, Y
        PauliVector::new(1, vec![1.0, vals[0], vals[2], vals[1]]).unwrap()
    }

    fn had_lambda(x: f64) -> PLParams {
        PLParams::from_labels(1, [("X", x / 2.0), ("Y", -0.5 * x.cosh().ln()), ("Z", x / 2.0)]).unwrap()
    }

    #[test]
    fn identity_in_support_is_rejected() {
        assert!(PLParams::from_labels(1, [("I", 0.1)]).is_err());
        assert!(PLParams::from_labels(1, [("X", 0.1), ("X", 0.2)]).is_err());
        let bad = PLParams::new(1, [(PauliWord::from_label("X").unwrap(), Complex64::new(0.0, 0.3))]);
        assert!(bad.is_err());
    }

    #[test]
    fn f_from_lambda_examples() {
        let f = f_from_lambda_real(&PLParams::zero(2).unwrap()).unwrap();
        assert!(f.values().iter().all(|&v| v == 1.0));

        let l = -0.8f64.ln() / 4.0;
        let pl = PLParams::from_labels(1, [("X", l), ("Y", l), ("Z", l)]).unwrap();
        let f = f_from_lambda_real(&pl).unwrap();
        for (a, b) in f.values().iter().zip([1.0, 0.8, 0.8, 0.8]) {
            assert!((a - b).abs() < 1e-15);
        }

        let pl = PLParams::from_labels(1, [("X", 0.5), ("Y", -0.216895), ("Z", 0.5)]).unwrap();
        let f = f_from_lambda_real(&pl).unwrap();
        assert!((f.at("X").unwrap() - (2.0f64 * 0.216895 - 1.0).exp()).abs() < 1e-15);
        assert!((f.at("Y").unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        let back = lambda_from_f(&f).unwrap();
        for w in pl.support() {
            assert!((back.lambda(w) - pl.lambda(w)).norm() < 1e-12);
        }
    }

    #[test]
    fn lambda_from_f_examples() {
        let pl = lambda_from_f(&PauliVector::constant(1, 1.0).unwrap()).unwrap();
        assert_eq!(pl.len(), 3);
        assert!(pl.terms().all(|(_, l)| l.norm() == 0.0));

        let pl = lambda_from_f(&f1([0.8, 0.8, 0.8])).unwrap();
        for label in ["X", "Y", "Z"] {
            assert!((pl.lambda_re(label) - 0.0557858).abs() < 1e-7);
            assert!((pl.lambda_re(label) + 0.8f64.ln() / 4.0).abs() < 1e-15);
        }

        let f = f1([-0.5, 0.25, -0.5]);
        let pl = lambda_from_f(&f).unwrap();
        let unit = std::f64::consts::PI / 4.0;
        assert!(pl.terms().any(|(_, l)| l.im != 0.0));
        for (_, l) in pl.terms() {
            let k = l.im / unit;
            assert!((k - k.round()).abs() < 1e-12);
        }
        let back = f_from_lambda(&pl);
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - Complex64::new(*b, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_eigenvalue_is_ill_defined() {
        let err = lambda_from_f(&f1([0.0, 0.5, 0.5])).unwrap_err();
        assert!(matches!(err, Error::IllDefinedLambda { ref word, .. } if word == "X"));
        assert!(err.to_string().contains("ill-defined"));
    }

    #[test]
    fn pl_channel_examples() {
        let ch = pl_channel(&PLParams::from_labels(1, [("Z", 0.1)]).unwrap()).unwrap();
        let e = (-0.2f64).exp();
        for (label, v) in [("X", e), ("Y", e), ("Z", 1.0)] {
            assert!((ch.eigenvalues().at(label).unwrap() - v).abs() < 1e-15);
        }
        let p = ch.probabilities();
        assert!((p.p.at("Z").unwrap() - (1.0 - e) / 2.0).abs() < 1e-15);

        let id = pl_channel(&PLParams::zero(1).unwrap()).unwrap();
        assert_eq!(id.eigenvalues().values(), &[1.0; 4]);

        let ch = pl_channel(&had_lambda(1.0)).unwrap();
        let r = ch.is_cptp(Tolerances::default());
        assert!(r.is_cptp, "{r:?}");

        let ch = pl_channel(&PLParams::from_labels(1, [("X", -0.3)]).unwrap()).unwrap();
        assert!(!ch.is_cptp(Tolerances::default()).is_cptp);
        assert!(!ch.to_channel().unwrap().is_cptp(Tolerances::default()).is_cptp);
    }

    #[test]
    fn classify_examples() {
        let v = classify_pauli(&f1([0.8, 0.8, 0.8]), DEFAULT_CSM_TOL).unwrap();
        assert!(v.is_csm);
        assert!((v.min_value - 0.0557858).abs() < 1e-7);

        let f = pl_channel(&had_lambda(1.0)).unwrap().eigenvalues().clone();
        let v = classify_pauli(&f, DEFAULT_CSM_TOL).unwrap();
        assert!(!v.is_csm);
        assert!((v.min_value + 0.5 * 1f64.cosh().ln()).abs() < 1e-12);
        assert!((v.min_value + 0.216895).abs() < 1e-5);

        let v = classify_pauli(&PauliVector::constant(1, 1.0).unwrap(), DEFAULT_CSM_TOL).unwrap();
        assert!(v.is_csm);
        assert_eq!(v.min_value, 0.0);

        let v = classify_pauli(&f1([-0.5, 0.25, -0.5]), DEFAULT_CSM_TOL).unwrap();
        assert!(!v.is_csm);
        assert_eq!(v.min_value, f64::NEG_INFINITY);

        assert!(classify_pauli(&f1([0.0, 1.0, 0.0]), DEFAULT_CSM_TOL).is_err());
    }

    #[test]
    fn qubit_criterion_examples() {
        assert!(qubit_criterion(&f1([0.8, 0.8, 0.8])).unwrap());
        assert!(!qubit_criterion(&f1([0.9, 0.5, 0.9])).unwrap());
        assert!(qubit_criterion(&PauliVector::constant(1, 1.0).unwrap()).unwrap());
        assert!(qubit_criterion(&PauliVector::constant(2, 1.0).unwrap()).is_err());
        assert!(qubit_criterion(&f1([-0.1, 0.5, 0.9])).is_err());
    }

    #[test]
    fn qubit_criterion_agrees_with_classifier() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut seen = [0usize; 2];
        let mut tested = 0;
        while tested < 10_000 {
            let p = crate::random::random_distribution(4, &mut rng);
            let ch = PauliChannel::from_probabilities(&PauliVector::new(1, p).unwrap());
            let f = ch.eigenvalues();
            if f.values().iter().any(|&v| v <= 0.0) {
                continue;
            }
            tested += 1;
            let crit = qubit_criterion(f).unwrap();
            let verdict = classify_pauli(f, 1e-14).unwrap();
            assert_eq!(crit, verdict.is_csm, "{f:?}");
            seen[crit as usize] += 1;
        }
        assert!(seen[0] > 100 && seen[1] > 100, "{seen:?}");
    }

    #[test]
    fn saturation_bound() {
        assert_eq!(min_third_parameter(0.0).unwrap(), 0.0);
        assert!((min_third_parameter(0.5).unwrap() + 0.5 * 1f64.cosh().ln()).abs() < 1e-15);
        assert!((min_third_parameter(0.5).unwrap() + 0.216895).abs() < 1e-5);
        assert!(min_third_parameter(-0.1).is_err());
        // at the bound the smallest probability is exactly zero
        for ell in [0.05, 0.3, 0.5, 1.2] {
            let third = min_third_parameter(ell).unwrap();
            let pl = PLParams::from_labels(1, [("X", ell), ("Y", third), ("Z", ell)]).unwrap();
            let p = pl_channel(&pl).unwrap().probabilities();
            let min_p = p.p.values().iter().copied().fold(f64::INFINITY, f64::min);
            assert!(min_p.abs() < 1e-14, "{min_p}");
            let below = PLParams::from_labels(1, [("X", ell), ("Y", third - 1e-3), ("Z", ell)]).unwrap();
            let p = pl_channel(&below).unwrap().probabilities();
            assert!(p.p.values().iter().any(|&v| v < 0.0));
        }
    }

    fn measurements(f: &PauliVector) -> Vec<Measurement> {
        f.iter()
            .skip(1)
            .map(|(word, &value)| Measurement { word, value, sigma: None })
            .collect()
    }

    fn xyz() -> Vec<PauliWord> {
        ["X", "Y", "Z"].iter().map(|l| PauliWord::from_label(l).unwrap()).collect()
    }

    #[test]
    fn fit_exact_csm_data() {
        let pl = PLParams::from_labels(1, [("X", 0.02), ("Y", 0.01), ("Z", 0.05)]).unwrap();
        let f = f_from_lambda_real(&pl).unwrap();
        for allow in [true, false] {
            let fit = fit_sparse_lambda(&measurements(&f), &xyz(), allow).unwrap();
            assert!(fit.residual < 1e-10);
            for w in pl.support() {
                assert!((fit.params.lambda(w) - pl.lambda(w)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn fit_negative_parameter() {
        let f = f_from_lambda_real(&had_lambda(1.0)).unwrap();
        let free = fit_sparse_lambda(&measurements(&f), &xyz(), true).unwrap();
        assert!(free.residual < 1e-10);
        assert!((free.params.lambda_re("Y") + 0.5 * 1f64.cosh().ln()).abs() < 1e-10);

        let clamped = fit_sparse_lambda(&measurements(&f), &xyz(), false).unwrap();
        assert!(clamped.params.lambda_re("Y") >= 0.0);
        assert!(clamped.residual > 1e-4, "{}", clamped.residual);
        assert!(clamped.params.terms().all(|(_, l)| l.re >= 0.0));
    }

    #[test]
    fn fit_errors() {
        let f = f1([0.9, 0.8, 0.7]);
        let ms = measurements(&f);
        // a single equation cannot pin three parameters
        assert!(matches!(
            fit_sparse_lambda(&ms[..1], &xyz(), true),
            Err(Error::RankDeficient { .. })
        ));
        let mut bad = ms.clone();
        bad[0].value = -0.1;
        assert!(matches!(
            fit_sparse_lambda(&bad, &xyz(), true),
            Err(Error::NonPositiveMeasurement { .. })
        ));
    }

    #[test]
    fn fit_recovers_sparse_two_qubit_model() {
        let support: Vec<PauliWord> =
            ["XI", "IX", "ZI", "IZ", "ZZ", "XX"].iter().map(|l| PauliWord::from_label(l).unwrap()).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let pl = PLParams::new(
            2,
            support.iter().map(|w| (*w, Complex64::new(rng.random_range(-0.05..0.2), 0.0))),
        )
        .unwrap();
        let f = f_from_lambda_real(&pl).unwrap();
        let mut ms = measurements(&f);
        ms.iter_mut().enumerate().for_each(|(i, m)| m.sigma = Some(0.01 * (1.0 + i as f64)));
        let fit = fit_sparse_lambda(&ms, &support, true).unwrap();
        assert!(fit.residual < 1e-10);
        for w in &support {
            assert!((fit.params.lambda(w) - pl.lambda(w)).norm() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn lambda_f_round_trip(n in 1usize..=3, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pl = PLParams::new(
                n,
                (1..1usize << (2 * n)).map(|a| {
                    (PauliWord::from_index(n, a).unwrap(), Complex64::new(rng.random_range(-0.05..0.15), 0.0))
                }),
            ).unwrap();
            let back = lambda_from_f(&f_from_lambda_real(&pl).unwrap()).unwrap();
            for w in pl.support() {
                prop_assert!((back.lambda(w) - pl.lambda(w)).norm() < 1e-12);
            }
        }

        #[test]
        fn f_lambda_round_trip(n in 1usize..=3, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut vals: Vec<f64> = (0..1usize << (2 * n)).map(|_| rng.random_range(0.05..=1.0)).collect();
            vals[0] = 1.0;
            let f = PauliVector::new(n, vals).unwrap();
            let back = f_from_lambda_real(&lambda_from_f(&f).unwrap()).unwrap();
            for (a, b) in back.values().iter().zip(f.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn nonnegative_lambda_is_csm(n in 1usize..=2, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pl = PLParams::new(
                n,
                (1..1usize << (2 * n)).map(|a| {
                    (PauliWord::from_index(n, a).unwrap(), Complex64::new(rng.random_range(0.0..0.5), 0.0))
                }),
            ).unwrap();
            let f = f_from_lambda_real(&pl).unwrap();
            prop_assert!(classify_pauli(&f, DEFAULT_CSM_TOL).unwrap().is_csm);
        }
    }
}
