//! n-qubit Pauli words in symplectic form and Walsh-Hadamard transforms
//! between Pauli eigenvalues and Pauli probabilities.
//!
//! A word is stored as two bit masks: bit `i` of `x` (resp. `z`) is set when
//! qubit `i` carries an X (resp. Z) factor; Y has both bits set and follows
//! the convention `Y = iXZ`. Qubit 0 is the leftmost label character and the
//! most significant tensor factor of [`PauliWord::matrix`].
//!
//! Dense vectors over all `4^n` words use the canonical index
//! `x | (z << n)`, so for one qubit the order is `I, X, Z, Y`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{CMatrix, I, ONE, ZERO};
use num_complex::Complex64;

/// Largest qubit count a [`PauliWord`] can hold (its index must fit a `u64`).
pub const MAX_WORD_QUBITS: usize = 32;
/// Largest qubit count for dense `2^n x 2^n` matrices.
pub const MAX_DENSE_QUBITS: usize = 6;
/// Largest qubit count for dense `4^n`-long vectors.
pub const MAX_VECTOR_QUBITS: usize = 10;

pub(crate) fn check_cap(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "qubit count must be positive"));
    }
    if n > cap {
        return Err(Error::TooManyQubits { what, n, cap });
    }
    Ok(())
}

/// Power of `i`: the phase in `P_a P_b = i^k P_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Phase exponent and product index for two words given as canonical indices.
#[inline]
pub(crate) fn mul_index(n: usize, a: usize, b: usize) -> (u32, usize) {
    let mask = (1usize << n) - 1;
    let (ax, az) = (a & mask, a >> n);
    let (bx, bz) = (b & mask, b >> n);
    let (cx, cz) = (ax ^ bx, az ^ bz);
    let k = (ax & az).count_ones() + (bx & bz).count_ones() + 2 * (az & bx).count_ones() + 4
        - ((cx & cz).count_ones() % 4);
    (k % 4, cx | (cz << n))
}

/// Symplectic form on canonical indices: 1 iff the words anticommute.
#[inline]
pub(crate) fn sympl_index(n: usize, a: usize, b: usize) -> u32 {
    let mask = (1usize << n) - 1;
    (((a & mask) & (b >> n)).count_ones() + ((a >> n) & (b & mask)).count_ones()) & 1
}

/// Label of the word with canonical index `idx`.
pub(crate) fn index_label(n: usize, idx: usize) -> String {
    PauliWord::from_index(n, idx).map(|w| w.label()).unwrap_or_default()
}

/// An n-qubit Pauli operator without phase.
/// Ordered by qubit count, then canonical index.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliWord {
    n: usize,
    x: u64,
    z: u64,
}

impl Ord for PauliWord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n, self.z, self.x).cmp(&(other.n, other.z, other.x))
    }
}

impl PartialOrd for PauliWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl PauliWord {
    pub fn identity(n: usize) -> Result<Self> {
        check_cap("PauliWord", n, MAX_WORD_QUBITS)?;
        Ok(Self { n, x: 0, z: 0 })
    }

    /// Builds a word from explicit bit masks (bit `i` refers to qubit `i`).
    pub fn from_bits(n: usize, x: u64, z: u64) -> Result<Self> {
        check_cap("PauliWord", n, MAX_WORD_QUBITS)?;
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if x & !mask != 0 || z & !mask != 0 {
            return Err(invalid("bits", format!("bit masks exceed {n} qubits")));
        }
        Ok(Self { n, x, z })
    }

    /// Parses a label over `{I, X, Y, Z}`.
    pub fn from_label(label: &str) -> Result<Self> {
        if label.is_empty() {
            return Err(Error::EmptyLabel);
        }
        let n = label.chars().count();
        check_cap("PauliWord", n, MAX_WORD_QUBITS)?;
        let (mut x, mut z) = (0u64, 0u64);
        for (i, ch) in label.chars().enumerate() {
            let (xb, zb) = match ch {
                'I' => (0, 0),
                'X' => (1, 0),
                'Y' => (1, 1),
                'Z' => (0, 1),
                _ => return Err(Error::PauliParse { position: i, ch }),
            };
            x |= xb << i;
            z |= zb << i;
        }
        Ok(Self { n, x, z })
    }

    pub fn from_index(n: usize, idx: usize) -> Result<Self> {
        check_cap("PauliWord", n, MAX_WORD_QUBITS)?;
        if (idx as u128) >= 1u128 << (2 * n) {
            return Err(invalid("index", format!("{idx} out of range for n = {n}")));
        }
        let mask = (1u64 << n) - 1;
        let idx = idx as u64;
        Ok(Self { n, x: idx & mask, z: idx >> n })
    }

    /// Canonical index `x | (z << n)`.
    pub fn index(&self) -> usize {
        (self.x | (self.z << self.n)) as usize
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn label(&self) -> String {
        (0..self.n)
            .map(|i| match ((self.x >> i) & 1, (self.z >> i) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            })
            .collect()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    /// `0` if the two words commute, `1` if they anticommute.
    pub fn symplectic_product(&self, other: &Self) -> Result<u8> {
        self.check_same(other)?;
        Ok((((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) & 1) as u8)
    }

    /// Matrix product `self · other = phase · result`.
    pub fn multiply(&self, other: &Self) -> Result<(Phase, PauliWord)> {
        self.check_same(other)?;
        let (cx, cz) = (self.x ^ other.x, self.z ^ other.z);
        let k = (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 4
            - ((cx & cz).count_ones() % 4);
        Ok((Phase::from_exponent(k), PauliWord { n: self.n, x: cx, z: cz }))
    }

    /// Row masks in matrix-bit order (qubit 0 is the most significant bit).
    fn matrix_masks(&self) -> (usize, usize) {
        let (mut xm, mut zm) = (0usize, 0usize);
        for q in 0..self.n {
            let bit = 1usize << (self.n - 1 - q);
            if (self.x >> q) & 1 == 1 {
                xm |= bit;
            }
            if (self.z >> q) & 1 == 1 {
                zm |= bit;
            }
        }
        (xm, zm)
    }

    /// The `2^n` nonzero entries `(row, col, value)`, one per column.
    pub(crate) fn entries(&self) -> Vec<(usize, usize, Complex64)> {
        let (xm, zm) = self.matrix_masks();
        let base = Phase::from_exponent((self.x & self.z).count_ones());
        (0..1usize << self.n)
            .map(|col| {
                let sign = if (zm & col).count_ones() % 2 == 1 { Phase::MINUS_ONE } else { Phase::ONE };
                (col ^ xm, col, (base * sign).to_complex())
            })
            .collect()
    }

    /// Dense `2^n x 2^n` matrix.
    pub fn matrix(&self) -> Result<CMatrix> {
        check_cap("pauli_matrix", self.n, MAX_DENSE_QUBITS)?;
        let dim = 1usize << self.n;
        let mut m = CMatrix::from_element(dim, dim, ZERO);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        Ok(m)
    }

    /// All `4^n` words in canonical order.
    pub fn all(n: usize) -> Result<impl Iterator<Item = PauliWord>> {
        check_cap("PauliWord::all", n, MAX_VECTOR_QUBITS)?;
        Ok((0..1usize << (2 * n)).map(move |i| PauliWord::from_index(n, i).expect("in range")))
    }
}

impl fmt::Debug for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliWord({})", self.label())
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for PauliWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_label(s)
    }
}

impl Serialize for PauliWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for PauliWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        PauliWord::from_label(&s).map_err(serde::de::Error::custom)
    }
}

/// Scalars a [`PauliVector`] can hold.
pub trait Scalar:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> + Mul<f64, Output = Self>
{
}
impl Scalar for f64 {}
impl Scalar for Complex64 {}

/// A value per Pauli word, in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPauliVector<T>", bound(deserialize = "T: Deserialize<'de>"))]
pub struct PauliVector<T = f64> {
    n: usize,
    values: Vec<T>,
}

#[derive(Deserialize)]
struct RawPauliVector<T> {
    n: usize,
    values: Vec<T>,
}

impl<T> TryFrom<RawPauliVector<T>> for PauliVector<T> {
    type Error = Error;
    fn try_from(raw: RawPauliVector<T>) -> Result<Self> {
        PauliVector::new(raw.n, raw.values)
    }
}

impl<T> PauliVector<T> {
    pub fn new(n: usize, values: Vec<T>) -> Result<Self> {
        check_cap("PauliVector", n, MAX_VECTOR_QUBITS)?;
        if values.len() != 1 << (2 * n) {
            return Err(Error::Shape(format!(
                "PauliVector for n = {n} needs {} entries, got {}",
                1usize << (2 * n),
                values.len()
            )));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, word: &PauliWord) -> Result<&T> {
        if word.n() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: word.n() });
        }
        Ok(&self.values[word.index()])
    }

    /// Iterates `(word, value)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (PauliWord, &T)> {
        let n = self.n;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (PauliWord::from_index(n, i).expect("in range"), v))
    }
}

impl<T: Scalar> PauliVector<T> {
    pub fn constant(n: usize, value: T) -> Result<Self> {
        check_cap("PauliVector", n, MAX_VECTOR_QUBITS)?;
        Ok(Self { n, values: vec![value; 1 << (2 * n)] })
    }

    /// Looks up a value by label.
    pub fn at(&self, label: &str) -> Result<T> {
        Ok(*self.get(&PauliWord::from_label(label)?)?)
    }
}

/// Unnormalized transform `out_a = Σ_k (-1)^<a,k> v_k`, O(n 4^n).
///
/// The symplectic form is a plain parity `popcount(swap(a) & k)` after
/// exchanging the x and z halves of `a`, so this is an ordinary Hadamard
/// butterfly followed by a permutation.
pub fn walsh_hadamard<T: Scalar>(n: usize, values: &[T]) -> Vec<T> {
    let len = values.len();
    debug_assert_eq!(len, 1 << (2 * n));
    let mut h = values.to_vec();
    let mut span = 1;
    while span < len {
        for block in (0..len).step_by(2 * span) {
            for i in block..block + span {
                let (u, v) = (h[i], h[i + span]);
                h[i] = u + v;
                h[i + span] = u - v;
            }
        }
        span *= 2;
    }
    let mask = (1usize << n) - 1;
    (0..len).map(|a| h[(a >> n) | ((a & mask) << n)]).collect()
}

/// Reference O(16^n) double loop for [`walsh_hadamard`].
pub fn walsh_hadamard_naive<T: Scalar>(n: usize, values: &[T]) -> Vec<T> {
    let len = values.len();
    (0..len)
        .map(|a| {
            values.iter().enumerate().fold(T::default(), |acc, (k, &v)| {
                if sympl_index(n, a, k) == 1 {
                    acc - v
                } else {
                    acc + v
                }
            })
        })
        .collect()
}

/// `f_a = Σ_k (-1)^<a,k> p_k`.
pub fn walsh_hadamard_p_to_f(p: &PauliVector) -> PauliVector {
    PauliVector { n: p.n, values: walsh_hadamard(p.n, &p.values) }
}

/// Output of [`walsh_hadamard_f_to_p`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probabilities {
    pub p: PauliVector,
    /// `Σ_a p_a`, equal to `f_0`.
    pub total: f64,
    /// False when `f_0` differs from 1 by more than `1e-12`.
    pub trace_preserving: bool,
}

/// `p_a = 4^-n Σ_k (-1)^<a,k> f_k`. Inputs with `f_0 != 1` are accepted
/// and flagged.
pub fn walsh_hadamard_f_to_p(f: &PauliVector) -> Probabilities {
    let scale = 1.0 / f.len() as f64;
    let values: Vec<f64> = walsh_hadamard(f.n, &f.values).into_iter().map(|v| v * scale).collect();
    let total = f.values[0];
    Probabilities {
        p: PauliVector { n: f.n, values },
        total,
        trace_preserving: (total - 1.0).abs() <= 1e-12,
    }
}
