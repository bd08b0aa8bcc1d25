//! JSON and CSV file formats.
//!
//! Complex numbers are `[re, im]` pairs; a bare number is accepted as a real
//! entry on input. Matrices are arrays of rows. Errors name the offending
//! field with a JSON-path-like string such as `data[2][1]`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::channel::{Channel, ReprKind, Representation, IMAG_TOL};
use crate::error::{format_err, Error, Result};
use crate::linalg::{CMatrix, RMatrix};
use crate::lindblad::LindbladGenerator;
use crate::pauli::{PauliVector, PauliWord};
use crate::plmodel::{CsmVerdict, FitResult, Measurement, PLParams, Witness};
use crate::scenarios::SweepResult;

pub fn complex_to_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn complex_from_json(v: &Value, field: &str) -> Result<Complex64> {
    match v {
        Value::Number(x) => Ok(Complex64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(pair) if pair.len() == 2 => {
            let part = |i: usize| {
                pair[i].as_f64().ok_or_else(|| format_err(format!("{field}[{i}]"), "expected a number"))
            };
            Ok(Complex64::new(part(0)?, part(1)?))
        }
        _ => Err(format_err(field, "expected a number or an [re, im] pair")),
    }
}

fn real_from_json(v: &Value, field: &str) -> Result<f64> {
    let z = complex_from_json(v, field)?;
    if z.im.abs() > IMAG_TOL {
        return Err(format_err(field, "expected a real entry"));
    }
    Ok(z.re)
}

pub fn cmatrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect())).collect(),
    )
}

pub fn rmatrix_to_json(m: &RMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| json!(m[(i, j)])).collect())).collect())
}

fn rows<'a>(v: &'a Value, field: &str) -> Result<&'a [Value]> {
    v.as_array().map(Vec::as_slice).ok_or_else(|| format_err(field, "expected an array"))
}

/// Square complex matrix of side `dim` (any side when `None`).
pub fn cmatrix_from_json(v: &Value, field: &str, dim: Option<usize>) -> Result<CMatrix> {
    let rs = rows(v, field)?;
    let d = dim.unwrap_or(rs.len());
    if rs.len() != d {
        return Err(format_err(field, format!("expected {d} rows, got {}", rs.len())));
    }
    let mut m = CMatrix::zeros(d, d);
    for (i, r) in rs.iter().enumerate() {
        let rf = format!("{field}[{i}]");
        let cs = rows(r, &rf)?;
        if cs.len() != d {
            return Err(format_err(rf, format!("expected {d} entries, got {}", cs.len())));
        }
        for (j, e) in cs.iter().enumerate() {
            m[(i, j)] = complex_from_json(e, &format!("{rf}[{j}]"))?;
        }
    }
    Ok(m)
}

/// Real `dim x dim` matrix, nested or flat row-major.
pub fn rmatrix_from_json(v: &Value, field: &str, dim: usize) -> Result<RMatrix> {
    let rs = rows(v, field)?;
    if dim > 1 && rs.len() == dim * dim {
        let vals = rs.iter().enumerate().map(|(k, e)| real_from_json(e, &format!("{field}[{k}]"))).collect::<Result<Vec<_>>>()?;
        return Ok(RMatrix::from_row_slice(dim, dim, &vals));
    }
    let c = cmatrix_from_json(v, field, Some(dim))?;
    let mut m = RMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let z = c[(i, j)];
            if z.im.abs() > IMAG_TOL {
                return Err(format_err(format!("{field}[{i}][{j}]"), "expected a real entry"));
            }
            m[(i, j)] = z.re;
        }
    }
    Ok(m)
}

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value> {
    v.get(name).ok_or_else(|| format_err(name, "missing field"))
}

fn qubit_count(v: &Value) -> Result<usize> {
    let n = field(v, "n")?.as_u64().ok_or_else(|| format_err("n", "expected a nonnegative integer"))?;
    if n > 16 {
        return Err(format_err("n", format!("{n} qubits is out of range")));
    }
    Ok(n as usize)
}

fn parse<T: for<'de> Deserialize<'de>>(v: &Value, name: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| format_err(name, e.to_string()))
}

pub fn value_from_str(s: &str) -> Result<Value> {
    serde_json::from_str(s).map_err(|e| format_err("$", e.to_string()))
}

pub fn read_value<R: Read>(r: R) -> Result<Value> {
    serde_json::from_reader(r).map_err(|e| format_err("$", e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn write_value<W: Write>(mut w: W, v: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, v)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// `{"n", "repr", "data"}`.
pub fn channel_from_json(v: &Value) -> Result<Channel> {
    let n = qubit_count(v)?;
    let repr: ReprKind = parse(field(v, "repr")?, "repr")?;
    let data = field(v, "data")?;
    let d = 1usize << n;
    let repr = match repr {
        ReprKind::Transfer => Representation::Transfer(rmatrix_from_json(data, "data", d * d)?),
        ReprKind::Choi => Representation::Choi(cmatrix_from_json(data, "data", Some(d * d))?),
        ReprKind::PauliBasis => Representation::PauliBasis(cmatrix_from_json(data, "data", Some(d * d))?),
        ReprKind::Kraus => {
            let ks = rows(data, "data")?;
            if ks.is_empty() {
                return Err(format_err("data", "empty Kraus set"));
            }
            let ks = ks
                .iter()
                .enumerate()
                .map(|(k, m)| cmatrix_from_json(m, &format!("data[{k}]"), Some(d)))
                .collect::<Result<Vec<_>>>()?;
            Representation::Kraus(ks)
        }
    };
    Channel::from_representation(repr)
}

pub fn channel_to_json(ch: &Channel, kind: ReprKind) -> Value {
    let data = match ch.representation(kind) {
        Representation::Transfer(t) => rmatrix_to_json(&t),
        Representation::Choi(m) | Representation::PauliBasis(m) => cmatrix_to_json(&m),
        Representation::Kraus(ks) => Value::Array(ks.iter().map(cmatrix_to_json).collect()),
    };
    json!({ "n": ch.n(), "repr": kind, "data": data })
}

/// `{"n", "terms": [{"word", "lambda": [re, im]}]}`.
pub fn pl_from_json(v: &Value) -> Result<PLParams> {
    let n = qubit_count(v)?;
    let terms = rows(field(v, "terms")?, "terms")?;
    let mut parsed = Vec::with_capacity(terms.len());
    for (i, t) in terms.iter().enumerate() {
        let f = format!("terms[{i}]");
        let word: PauliWord = parse(
            t.get("word").ok_or_else(|| format_err(format!("{f}.word"), "missing field"))?,
            &format!("{f}.word"),
        )?;
        if word.n() != n {
            return Err(format_err(format!("{f}.word"), format!("expected {n} qubits, got {}", word.n())));
        }
        let lambda = t.get("lambda").ok_or_else(|| format_err(format!("{f}.lambda"), "missing field"))?;
        parsed.push((word, complex_from_json(lambda, &format!("{f}.lambda"))?));
    }
    PLParams::new(n, parsed)
}

pub fn pl_to_json(pl: &PLParams) -> Value {
    let terms: Vec<Value> =
        pl.terms().map(|(w, l)| json!({ "word": w.label(), "lambda": complex_to_json(*l) })).collect();
    json!({ "n": pl.n(), "terms": terms })
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// `{"is_csm", "witness", "min_value", "tol"}`; a non-finite `min_value`
/// is written as `null`.
pub fn verdict_to_json(v: &CsmVerdict) -> Value {
    let witness = match &v.witness {
        Witness::Lambda(pl) => json!({ "kind": "lambda", "lambda": pl_to_json(pl) }),
        Witness::KossakowskiSpectrum(e) => {
            json!({ "kind": "kossakowski_spectrum", "eigenvalues": e.iter().map(|x| finite_or_null(*x)).collect::<Vec<_>>() })
        }
    };
    json!({ "is_csm": v.is_csm, "witness": witness, "min_value": finite_or_null(v.min_value), "tol": v.tol })
}

/// Fit input `{"f": [{"word", "value", "sigma"}], "support", "allow_negative"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitInput {
    pub f: Vec<Measurement>,
    pub support: Vec<PauliWord>,
    #[serde(default = "default_allow_negative")]
    pub allow_negative: bool,
}

fn default_allow_negative() -> bool {
    true
}

pub fn fit_input_from_json(v: &Value) -> Result<FitInput> {
    for (name, what) in [("f", "measurements"), ("support", "support words")] {
        rows(field(v, name)?, name).map_err(|_| format_err(name, format!("expected an array of {what}")))?;
    }
    parse(v, "$")
}

pub fn fit_result_to_json(r: &FitResult, allow_negative: bool) -> Value {
    json!({ "params": pl_to_json(&r.params), "residual": r.residual, "allow_negative": allow_negative })
}

/// `{"n", "H", "Gamma"}` with `Gamma` over the non-identity words.
pub fn generator_from_json(v: &Value) -> Result<LindbladGenerator> {
    let n = qubit_count(v)?;
    let d = 1usize << n;
    let h = cmatrix_from_json(field(v, "H")?, "H", Some(d))?;
    let gamma = cmatrix_from_json(field(v, "Gamma")?, "Gamma", Some(d * d - 1))?;
    LindbladGenerator::new(h, gamma)
}

pub fn generator_to_json(g: &LindbladGenerator) -> Value {
    json!({ "n": g.n(), "H": cmatrix_to_json(g.hamiltonian()), "Gamma": cmatrix_to_json(g.kossakowski()) })
}

pub fn pauli_vector_to_json(f: &PauliVector) -> Value {
    json!({ "n": f.n(), "values": f.values() })
}

/// Product state from a name applied to every qubit (`zero`, `one`,
/// `plus`, `minus`, `plus_i`, `minus_i`) or one character per qubit from
/// `0 1 + - r l`.
pub fn state_from_spec(spec: &str, n: usize) -> Result<CMatrix> {
    let named = match spec {
        "zero" => Some('0'),
        "one" => Some('1'),
        "plus" => Some('+'),
        "minus" => Some('-'),
        "plus_i" => Some('r'),
        "minus_i" => Some('l'),
        _ => None,
    };
    let chars: Vec<char> = match named {
        Some(ch) => vec![ch; n],
        None => spec.chars().collect(),
    };
    if chars.len() != n {
        return Err(format_err("state", format!("expected a state name or {n} characters, got {spec:?}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = nalgebra::DVector::from_element(1, Complex64::new(1.0, 0.0));
    for ch in chars {
        let (a, b) = match ch {
            '0' => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            '1' => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            '+' => (Complex64::new(h, 0.0), Complex64::new(h, 0.0)),
            '-' => (Complex64::new(h, 0.0), Complex64::new(-h, 0.0)),
            'r' => (Complex64::new(h, 0.0), Complex64::new(0.0, h)),
            'l' => (Complex64::new(h, 0.0), Complex64::new(0.0, -h)),
            other => return Err(format_err("state", format!("unknown qubit state {other:?}"))),
        };
        psi = psi.kronecker(&nalgebra::DVector::from_vec(vec![a, b]));
    }
    Ok(&psi * psi.adjoint())
}

/// Pauli observable from its label.
pub fn observable_from_spec(spec: &str, n: usize) -> Result<CMatrix> {
    let word = PauliWord::from_label(spec).map_err(|e| format_err("observable", e.to_string()))?;
    if word.n() != n {
        return Err(format_err("observable", format!("expected {n} qubits, got {}", word.n())));
    }
    word.matrix()
}

/// One CSV row of a phase-diagram sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma_tg: f64,
    pub gammaphi_tg: f64,
    pub region: String,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub lambda_z: f64,
    pub pretwirl_csm: String,
    pub min_kossakowski_eig: f64,
}

const SWEEP_HEADER: [&str; 8] = [
    "gamma_tg",
    "gammaphi_tg",
    "region",
    "lambda_x",
    "lambda_y",
    "lambda_z",
    "pretwirl_csm",
    "min_kossakowski_eig",
];

/// 17 significant digits, `.` decimal separator.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_sweep_csv<W: Write>(w: W, sweep: &SweepResult) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for p in &sweep.points {
        out.write_record([
            format_float(p.gamma_tg),
            format_float(p.gammaphi_tg),
            p.region.label().to_string(),
            format_float(p.lambda.x),
            format_float(p.lambda.y),
            format_float(p.lambda.z),
            p.pretwirl.map_or("error", |v| v.as_str()).to_string(),
            format_float(p.min_kossakowski_eig),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(r: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(Error::Format { field: "header".into(), message: format!("unexpected columns {header:?}") });
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}
