//! Windability certificates for symmetric signatures.
//!
//! A signature is windable iff for every pinning `G` of arity `m >= 1` the
//! half-vector `h` of `H(x) = G(x) G(x̄)` admits a nonnegative solution of
//! `A_m x = h`. `A_m` is lower triangular with a positive diagonal, so the
//! solution is unique and forward substitution decides feasibility.
//!
//! Convention: the right-hand side is always the raw half-vector `h`
//! (never the binomially weighted `z(h)_i = C(m,i) h_i`), rescaled so that
//! its largest entry is 1. Rescaling does not change the sign pattern of `x`.

pub mod cone;
pub mod matrices;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::signature::{pinned_ising_product, Signature};
use matrices::rational_to_f64;

pub use cone::{cone_generators, generator_witness, verify_cone_membership, verify_recurrence, ConeMembership};
pub use matrices::{
    double_factorial, matrix_a, matrix_b, row_sum_constant, verify_a_b_relation, verify_row_sums,
    verify_shift_identity, RationalMatrix,
};

/// Nonnegativity slack for floating-point certificates.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WindabilityError {
    #[error("double factorial is undefined for {0} < -1")]
    DoubleFactorialDomain(i64),
    #[error("arity must be at least 1 (got {0})")]
    ArityTooSmall(usize),
    #[error("half-vector for arity {m} needs {expected} entries, got {got}")]
    LengthMismatch { m: usize, expected: usize, got: usize },
    #[error("signature entry {0} is not a finite nonnegative number")]
    BadEntry(usize),
    #[error("signature must have arity at least 1")]
    EmptySignature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every entry converted to an exact rational; the verdict is a proof
    /// for the given inputs.
    Exact,
    /// `f64` forward substitution with [`FLOAT_TOLERANCE`].
    Float,
}

/// Solution of `A_m x = h` for one pinning `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindabilityCertificate {
    pub m: usize,
    pub a: usize,
    pub b: usize,
    pub h: Vec<f64>,
    pub x: Vec<f64>,
    pub feasible: bool,
    pub margin: f64,
    #[serde(skip)]
    pub exact_x: Option<Vec<BigRational>>,
    #[serde(skip)]
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindabilityVerdict {
    pub windable: bool,
    pub mode: Mode,
    pub certificates: Vec<WindabilityCertificate>,
    /// Index into `certificates` of the smallest margin.
    pub worst: Option<usize>,
}

impl WindabilityVerdict {
    pub fn worst_certificate(&self) -> Option<&WindabilityCertificate> {
        self.worst.map(|i| &self.certificates[i])
    }

    fn from_certificates(mode: Mode, certificates: Vec<WindabilityCertificate>) -> Self {
        let worst = certificates
            .iter()
            .enumerate()
            .min_by(|(_, p), (_, q)| p.margin.total_cmp(&q.margin))
            .map(|(i, _)| i);
        Self {
            windable: certificates.iter().all(|c| c.feasible),
            mode,
            certificates,
            worst,
        }
    }
}

pub(crate) fn forward_substitute_exact(a: &RationalMatrix, h: &[BigRational]) -> Vec<BigRational> {
    let mut x: Vec<BigRational> = Vec::with_capacity(h.len());
    for i in 0..h.len() {
        let mut acc = h[i].clone();
        for (j, xj) in x.iter().enumerate() {
            acc -= a.get(i, j) * xj;
        }
        x.push(acc / a.get(i, i));
    }
    x
}

fn check_len(m: usize, got: usize) -> Result<(), WindabilityError> {
    if m < 1 {
        return Err(WindabilityError::ArityTooSmall(m));
    }
    let expected = m / 2 + 1;
    if got != expected {
        return Err(WindabilityError::LengthMismatch { m, expected, got });
    }
    Ok(())
}

/// Exact certificate for `A_m x = h`.
pub fn solve_pinning(m: usize, h: &[BigRational]) -> Result<WindabilityCertificate, WindabilityError> {
    check_len(m, h.len())?;
    let a = matrix_a(m)?;
    let x = forward_substitute_exact(&a, h);
    let margin = x.iter().min().cloned().unwrap_or_else(BigRational::zero);
    Ok(WindabilityCertificate {
        m,
        a: 0,
        b: m,
        h: h.iter().map(rational_to_f64).collect(),
        x: x.iter().map(rational_to_f64).collect(),
        feasible: !margin.is_negative(),
        margin: rational_to_f64(&margin),
        exact_x: Some(x),
        residual: 0.0,
    })
}

/// Floating-point certificate for `A_m x = h`; feasible when every entry of
/// `x` is at least `-FLOAT_TOLERANCE`.
pub fn solve_pinning_f64(m: usize, h: &[f64]) -> Result<WindabilityCertificate, WindabilityError> {
    check_len(m, h.len())?;
    let a = matrix_a(m)?.to_f64();
    let mut x: Vec<f64> = Vec::with_capacity(h.len());
    for i in 0..h.len() {
        let mut acc = h[i];
        for (j, xj) in x.iter().enumerate() {
            acc -= a[i][j] * xj;
        }
        x.push(acc / a[i][i]);
    }
    let h_norm = h.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let residual = (0..h.len())
        .map(|i| {
            let ax: f64 = (0..=i).map(|j| a[i][j] * x[j]).sum();
            (ax - h[i]).abs()
        })
        .fold(0.0f64, f64::max);
    let margin = x.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(WindabilityCertificate {
        m,
        a: 0,
        b: m,
        h: h.to_vec(),
        x,
        feasible: margin >= -FLOAT_TOLERANCE && residual <= FLOAT_TOLERANCE * h_norm.max(f64::MIN_POSITIVE),
        margin,
        exact_x: None,
        residual,
    })
}

/// Half-vector of `complement_product(pin(values, a, b))` in exact
/// arithmetic, scaled to a maximum of 1.
fn exact_half_vector(values: &[BigRational], a: usize, b: usize) -> Vec<BigRational> {
    let m = b - a;
    let mut h: Vec<BigRational> = (0..=m / 2).map(|i| &values[a + i] * &values[b - i]).collect();
    if let Some(max) = h.iter().max().cloned() {
        if max.is_positive() {
            for v in &mut h {
                *v /= &max;
            }
        }
    }
    h
}

fn float_half_vector(log_values: &[f64], a: usize, b: usize) -> Vec<f64> {
    let m = b - a;
    let logs: Vec<f64> = (0..=m / 2).map(|i| log_values[a + i] + log_values[b - i]).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return vec![0.0; logs.len()];
    }
    logs.iter().map(|l| (l - top).exp()).collect()
}

fn pinnings(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=d).flat_map(move |a| (a + 1..=d).map(move |b| (a, b)))
}

/// Exact windability test for a signature given by rational values.
pub fn is_windable_rational(values: &[BigRational]) -> Result<WindabilityVerdict, WindabilityError> {
    if values.len() < 2 {
        return Err(WindabilityError::EmptySignature);
    }
    if let Some(i) = values.iter().position(|v| v.is_negative()) {
        return Err(WindabilityError::BadEntry(i));
    }
    let d = values.len() - 1;
    let mut certs = Vec::new();
    for (a, b) in pinnings(d) {
        let h = exact_half_vector(values, a, b);
        let mut cert = solve_pinning(b - a, &h)?;
        cert.a = a;
        cert.b = b;
        certs.push(cert);
    }
    Ok(WindabilityVerdict::from_certificates(Mode::Exact, certs))
}

/// Runs the criterion over every pinning `(a, b)` with `b - a >= 1`.
/// Exact mode converts each `f64` value to the rational it represents.
pub fn is_windable(sig: &Signature, mode: Mode) -> Result<WindabilityVerdict, WindabilityError> {
    if sig.arity() < 1 {
        return Err(WindabilityError::EmptySignature);
    }
    match mode {
        Mode::Exact => {
            let values = sig
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| BigRational::from_float(*v).ok_or(WindabilityError::BadEntry(i)))
                .collect::<Result<Vec<_>, _>>()?;
            is_windable_rational(&values)
        }
        Mode::Float => {
            let logs = sig.log_values();
            let mut certs = Vec::new();
            for (a, b) in pinnings(sig.arity()) {
                let h = float_half_vector(logs, a, b);
                let mut cert = solve_pinning_f64(b - a, &h)?;
                cert.a = a;
                cert.b = b;
                certs.push(cert);
            }
            Ok(WindabilityVerdict::from_certificates(Mode::Float, certs))
        }
    }
}

/// Windability of the Ising signature through the closed form of its pinned
/// complement products: every pinning of arity `m` reduces to a positive
/// multiple of the zero-field signature with interaction `2 beta`, so only
/// one system per arity is solved. Certificates report `a = 0, b = m`.
pub fn ising_windability(beta: f64, mu: f64, d: usize) -> Result<WindabilityVerdict, WindabilityError> {
    if d < 1 {
        return Err(WindabilityError::EmptySignature);
    }
    let mut certs = Vec::with_capacity(d);
    for m in 1..=d {
        let (_, base) = pinned_ising_product(beta, mu, d, 0, m).expect("pinning in range");
        let logs = &base.log_values()[..=m / 2];
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let h: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let mut cert = solve_pinning_f64(m, &h)?;
        cert.b = m;
        certs.push(cert);
    }
    Ok(WindabilityVerdict::from_certificates(Mode::Float, certs))
}

/// Converts a decimal literal such as `0.7071` or `3/4` to an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Some(r)
}
