//! Symmetric vertex functions and the holant weight of half-edge states.
//!
//! Values are kept as natural logarithms: `beta * i * (d - i)` overflows a
//! plain `f64` product long before it overflows its exponent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignatureError {
    #[error("signature values must be nonnegative and finite (entry {index} = {value})")]
    BadValue { index: usize, value: f64 },
    #[error("pinning ({a}, {b}) is out of range for arity {d}")]
    PinningOutOfRange { a: usize, b: usize, d: usize },
    #[error("signature is not self-complementary")]
    NotSelfComplementary,
    #[error("empty signature vector")]
    Empty,
}

/// External field: uniform, or one value per edge of the underlying graph
/// (that is, per vertex of its line graph).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Fields {
    Uniform(f64),
    PerEdge(Vec<f64>),
}

impl Fields {
    #[inline]
    pub fn nu(&self, e: usize) -> f64 {
        match self {
            Fields::Uniform(nu) => *nu,
            Fields::PerEdge(v) => v[e],
        }
    }

    /// Largest `|nu_e|` over the first `m` edges.
    pub fn max_abs(&self, m: usize) -> f64 {
        match self {
            Fields::Uniform(nu) => nu.abs(),
            Fields::PerEdge(v) => v.iter().take(m).fold(0.0, |acc, x| acc.max(x.abs())),
        }
    }
}

/// Interaction energy `beta` (antiferromagnetic for `beta > 0`) and fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub fields: Fields,
}

impl ModelParams {
    pub fn uniform(beta: f64, nu: f64) -> Self {
        Self {
            beta,
            fields: Fields::Uniform(nu),
        }
    }

    pub fn per_edge(beta: f64, nu: Vec<f64>) -> Self {
        Self {
            beta,
            fields: Fields::PerEdge(nu),
        }
    }

    #[inline]
    pub fn nu(&self, e: usize) -> f64 {
        self.fields.nu(e)
    }

    /// Field share carried by each half-edge of `e`.
    #[inline]
    pub fn mu(&self, e: usize) -> f64 {
        0.5 * self.fields.nu(e)
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self {
            beta,
            fields: self.fields.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.beta.is_finite()
            && match &self.fields {
                Fields::Uniform(nu) => nu.is_finite(),
                Fields::PerEdge(v) => v.iter().all(|x| x.is_finite()),
            }
    }
}

/// Symmetric function of arity `d` given by `[f_0, ..., f_d]`, stored as logs
/// (`-inf` encodes a zero entry).
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    log_values: Vec<f64>,
}

impl Signature {
    pub fn from_values(values: &[f64]) -> Result<Self, SignatureError> {
        if values.is_empty() {
            return Err(SignatureError::Empty);
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(SignatureError::BadValue { index, value });
            }
        }
        Ok(Self {
            log_values: values.iter().map(|v| v.ln()).collect(),
        })
    }

    pub fn from_log_values(log_values: Vec<f64>) -> Result<Self, SignatureError> {
        if log_values.is_empty() {
            return Err(SignatureError::Empty);
        }
        for (index, &l) in log_values.iter().enumerate() {
            if l.is_nan() || l == f64::INFINITY {
                return Err(SignatureError::BadValue { index, value: l });
            }
        }
        Ok(Self { log_values })
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.log_values.len() - 1
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    /// Linear values; may overflow to `inf` for large exponents.
    pub fn values(&self) -> Vec<f64> {
        self.log_values.iter().map(|l| l.exp()).collect()
    }

    pub fn is_self_complementary(&self) -> bool {
        let d = self.arity();
        (0..=d / 2).all(|i| log_close(self.log_values[i], self.log_values[d - i]))
    }

    /// Every entry strictly positive.
    pub fn is_permissive(&self) -> bool {
        self.log_values.iter().all(|l| l.is_finite())
    }

    /// Slice `[f_a, ..., f_b]`: `a` inputs pinned to 1 and `d - b` to 0.
    pub fn pin(&self, a: usize, b: usize) -> Result<Signature, SignatureError> {
        let d = self.arity();
        if a > b || b > d {
            return Err(SignatureError::PinningOutOfRange { a, b, d });
        }
        Ok(Signature {
            log_values: self.log_values[a..=b].to_vec(),
        })
    }

    /// `H(x) = G(x) G(x̄)`, i.e. `z_i = g_i g_{m-i}`.
    pub fn complement_product(&self) -> Signature {
        let m = self.arity();
        Signature {
            log_values: (0..=m)
                .map(|i| self.log_values[i] + self.log_values[m - i])
                .collect(),
        }
    }

    /// First `floor(d/2) + 1` values of a self-complementary signature.
    pub fn half_vector(&self) -> Result<Vec<f64>, SignatureError> {
        Ok(self.log_half_vector()?.into_iter().map(f64::exp).collect())
    }

    pub fn log_half_vector(&self) -> Result<Vec<f64>, SignatureError> {
        if !self.is_self_complementary() {
            return Err(SignatureError::NotSelfComplementary);
        }
        Ok(self.log_values[..=self.arity() / 2].to_vec())
    }
}

fn log_close(x: f64, y: f64) -> bool {
    if x == y {
        return true;
    }
    (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0)
}

/// Ising vertex function `[exp(beta i (d - i) + mu i) : 0 <= i <= d]`.
pub fn ising_signature(beta: f64, mu: f64, d: usize) -> Signature {
    Signature {
        log_values: (0..=d)
            .map(|i| {
                let i = i as f64;
                beta * i * (d as f64 - i) + mu * i
            })
            .collect(),
    }
}

/// Closed form of `complement_product(pin(ising_signature(beta, mu, d), a, b))`:
/// the constant `K = exp(beta (a(d-a) + b(d-b)) + mu (a+b))` times the
/// zero-field signature with doubled interaction at arity `b - a`.
pub fn pinned_ising_product(
    beta: f64,
    mu: f64,
    d: usize,
    a: usize,
    b: usize,
) -> Result<(f64, Signature), SignatureError> {
    if a > b || b > d {
        return Err(SignatureError::PinningOutOfRange { a, b, d });
    }
    let (af, bf, df) = (a as f64, b as f64, d as f64);
    let log_k = beta * (af * (df - af) + bf * (df - bf)) + mu * (af + bf);
    Ok((log_k, ising_signature(2.0 * beta, 0.0, b - a)))
}

/// Number of 1-spins among the half-edges at each vertex.
pub fn ones_at_vertices(g: &Graph, spins: &[bool]) -> Vec<u32> {
    (0..g.vertex_count())
        .map(|k| g.half_edges_at(k).iter().filter(|&&h| spins[h]).count() as u32)
        .collect()
}

#[inline]
pub(crate) fn vertex_log_factor(beta: f64, ones: u32, degree: usize) -> f64 {
    let o = ones as f64;
    beta * o * (degree as f64 - o)
}

/// `log ŵ(σ)` for a half-edge assignment: each vertex contributes
/// `beta * o_k * (d_k - o_k)` and each half-edge of `e` set to 1 contributes
/// `nu_e / 2`.
pub fn log_weight(g: &Graph, params: &ModelParams, spins: &[bool]) -> f64 {
    debug_assert_eq!(spins.len(), g.half_edge_count());
    let ones = ones_at_vertices(g, spins);
    let vertex: f64 = (0..g.vertex_count())
        .map(|k| vertex_log_factor(params.beta, ones[k], g.degree(k)))
        .sum();
    let field: f64 = spins
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(h, _)| params.mu(h / 2))
        .sum();
    vertex + field
}

/// Change of `log ŵ` when half-edges `h1 != h2` are flipped, using the per
/// vertex one-counts `ones` of the current state.
pub fn log_weight_delta(
    g: &Graph,
    params: &ModelParams,
    spins: &[bool],
    ones: &[u32],
    h1: usize,
    h2: usize,
) -> f64 {
    debug_assert_ne!(h1, h2);
    let step = |h: usize| if spins[h] { -1i32 } else { 1 };
    let (s1, s2) = (step(h1), step(h2));
    let (k1, k2) = (g.owner(h1), g.owner(h2));
    let beta = params.beta;
    let vertex_delta = |k: usize, change: i32| {
        let before = ones[k];
        let after = (before as i32 + change) as u32;
        vertex_log_factor(beta, after, g.degree(k)) - vertex_log_factor(beta, before, g.degree(k))
    };
    let vertices = if k1 == k2 {
        vertex_delta(k1, s1 + s2)
    } else {
        vertex_delta(k1, s1) + vertex_delta(k2, s2)
    };
    let field = params.mu(h1 / 2) * s1 as f64 + params.mu(h2 / 2) * s2 as f64;
    vertices + field
}
