//! Brute-force references on small instances.
//!
//! Everything here enumerates; sums are accumulated in log space.

use serde::Serialize;
use thiserror::Error;

use crate::chains::{transition_matrix, ChainError, ChainKind};
use crate::graph::Graph;
use crate::signature::{log_weight, ModelParams};

pub const VERTEX_MODEL_CAP: usize = 24;
pub const H0_CAP: usize = 20;
pub const H2_CAP: usize = 16;
pub const RAW_H2_CAP: usize = 8;
pub const SUBDIVISION_CAP: usize = 10;
pub const STATIONARY_CAP: usize = 1 << 16;
/// Power iteration stops once `‖πP − π‖₁` falls below this.
pub const STATIONARY_RESIDUAL: f64 = 1e-13;
const STATIONARY_MAX_ITERATIONS: usize = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{what}: size {size} exceeds the enumeration cap {cap}")]
    TooLarge { what: &'static str, size: usize, cap: usize },
    #[error("distributions have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("expected {expected} field values, got {got}")]
    FieldCount { expected: usize, got: usize },
    #[error("power iteration did not converge (residual {0:e}); chain is not ergodic")]
    NonErgodic(f64),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

fn cap(what: &'static str, size: usize, cap: usize) -> Result<(), OracleError> {
    if size > cap {
        Err(OracleError::TooLarge { what, size, cap })
    } else {
        Ok(())
    }
}

/// Streaming `log Σ exp(x_i)`.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled += (x - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = LogSumExp::default();
    xs.into_iter().for_each(|x| acc.add(x));
    acc.value()
}

/// `log Z` of the Ising model directly on `lg`: each bichromatic edge
/// contributes `exp(beta)`, each 1-spin at `v` contributes `exp(fields[v])`.
pub fn exact_z_vertex_model(lg: &Graph, beta: f64, fields: &[f64]) -> Result<f64, OracleError> {
    let n = lg.vertex_count();
    cap("vertex model", n, VERTEX_MODEL_CAP)?;
    if fields.len() != n {
        return Err(OracleError::FieldCount {
            expected: n,
            got: fields.len(),
        });
    }
    let mut acc = LogSumExp::default();
    for mask in 0u32..1 << n {
        let bit = |v: usize| mask >> v & 1;
        let cut = lg.edges().iter().filter(|&&(u, v)| bit(u) != bit(v)).count() as f64;
        let field: f64 = (0..n).filter(|&v| bit(v) == 1).map(|v| fields[v]).sum();
        acc.add(beta * cut + field);
    }
    Ok(acc.value())
}

/// Half-edge spins of the consistent state with edge bitmask `mask`.
pub fn consistent_spins(m: usize, mask: u64) -> Vec<bool> {
    (0..2 * m).map(|h| mask >> (h / 2) & 1 == 1).collect()
}

/// `log ŵ` of every consistent state, indexed by edge bitmask.
pub fn consistent_log_weights(g: &Graph, params: &ModelParams) -> Result<Vec<f64>, OracleError> {
    let m = g.edge_count();
    cap("H0 enumeration", m, H0_CAP)?;
    Ok((0u64..1 << m)
        .map(|mask| log_weight(g, params, &consistent_spins(m, mask)))
        .collect())
}

pub fn exact_h0(g: &Graph, params: &ModelParams) -> Result<f64, OracleError> {
    Ok(log_sum_exp(consistent_log_weights(g, params)?))
}

/// `log H₂` by choosing the two inconsistent edges, their orientation
/// patterns, and a consistent assignment of the rest.
pub fn exact_h2(g: &Graph, params: &ModelParams) -> Result<f64, OracleError> {
    let m = g.edge_count();
    cap("H2 enumeration", m, H2_CAP)?;
    let mut acc = LogSumExp::default();
    let mut spins = vec![false; 2 * m];
    for e in 0..m {
        for f in e + 1..m {
            let rest: Vec<usize> = (0..m).filter(|&x| x != e && x != f).collect();
            for pattern in 0..4u8 {
                let (pe, pf) = (pattern & 1 == 1, pattern & 2 == 2);
                spins[2 * e] = pe;
                spins[2 * e + 1] = !pe;
                spins[2 * f] = pf;
                spins[2 * f + 1] = !pf;
                for mask in 0u64..1 << rest.len() {
                    for (bit, &x) in rest.iter().enumerate() {
                        let s = mask >> bit & 1 == 1;
                        spins[2 * x] = s;
                        spins[2 * x + 1] = s;
                    }
                    acc.add(log_weight(g, params, &spins));
                }
            }
        }
    }
    Ok(acc.value())
}

/// `log H₂` by scanning all `4^m` half-edge assignments.
pub fn exact_h2_raw(g: &Graph, params: &ModelParams) -> Result<f64, OracleError> {
    let m = g.edge_count();
    cap("raw H2 enumeration", m, RAW_H2_CAP)?;
    let mut acc = LogSumExp::default();
    for mask in 0u64..1 << (2 * m) {
        let spins: Vec<bool> = (0..2 * m).map(|h| mask >> h & 1 == 1).collect();
        let bad = (0..m).filter(|&e| spins[2 * e] != spins[2 * e + 1]).count();
        if bad == 2 {
            acc.add(log_weight(g, params, &spins));
        }
    }
    Ok(acc.value())
}

/// `log H₀` of the subdivided graph: every edge gets a midpoint carrying
/// `[1, 0, exp(nu_e)]`, and original vertices carry the zero-field Ising
/// signature. Enumerates `2^{2m}` edge assignments.
pub fn exact_h0_subdivided(g: &Graph, params: &ModelParams) -> Result<f64, OracleError> {
    let m = g.edge_count();
    cap("subdivision enumeration", m, SUBDIVISION_CAP)?;
    let mut acc = LogSumExp::default();
    // bit h of the mask is the spin on the half of edge h/2 next to its owner
    for mask in 0u64..1 << (2 * m) {
        let spin = |h: usize| mask >> h & 1 == 1;
        let mut log_w = 0.0;
        let mut zero = false;
        for e in 0..m {
            match (spin(2 * e), spin(2 * e + 1)) {
                (false, false) => {}
                (true, true) => log_w += params.nu(e),
                _ => {
                    zero = true;
                    break;
                }
            }
        }
        if zero {
            continue;
        }
        for k in 0..g.vertex_count() {
            let o = g.half_edges_at(k).iter().filter(|&&h| spin(h)).count() as f64;
            log_w += params.beta * o * (g.degree(k) as f64 - o);
        }
        acc.add(log_w);
    }
    Ok(acc.value())
}

fn normalise_log(log_w: &[f64]) -> Vec<f64> {
    let z = log_sum_exp(log_w.iter().copied());
    log_w.iter().map(|&x| (x - z).exp()).collect()
}

/// Gibbs distribution on `L(g)` over edge bitmasks.
pub fn exact_gibbs(g: &Graph, params: &ModelParams) -> Result<Vec<f64>, OracleError> {
    Ok(normalise_log(&consistent_log_weights(g, params)?))
}

/// Probabilities proportional to `ŵ` on an explicit list of half-edge states.
pub fn weight_distribution(g: &Graph, params: &ModelParams, states: &[Vec<bool>]) -> Vec<f64> {
    let log_w: Vec<f64> = states.iter().map(|s| log_weight(g, params, s)).collect();
    normalise_log(&log_w)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactSummary {
    #[serde(rename = "log_Z")]
    pub log_z_line_graph: f64,
    #[serde(rename = "log_H0")]
    pub log_h0: f64,
    #[serde(rename = "log_H2")]
    pub log_h2: f64,
    /// `log ŵ` of each consistent state by edge bitmask.
    #[serde(skip)]
    pub consistent_log_weights: Vec<f64>,
}

impl ExactSummary {
    pub fn omega_ratio(&self) -> f64 {
        (self.log_h2 - self.log_h0).exp()
    }
}

/// `Z(L(g))` by the vertex model, `H₀` and `H₂` by half-edge enumeration.
pub fn exact_summary(g: &Graph, params: &ModelParams) -> Result<ExactSummary, OracleError> {
    let lg = crate::graph::line_graph(g);
    let fields: Vec<f64> = (0..g.edge_count()).map(|e| params.nu(e)).collect();
    let log_z = exact_z_vertex_model(&lg, params.beta, &fields)?;
    let weights = consistent_log_weights(g, params)?;
    let log_h2 = if g.edge_count() < 2 {
        f64::NEG_INFINITY
    } else {
        exact_h2(g, params)?
    };
    Ok(ExactSummary {
        log_z_line_graph: log_z,
        log_h0: log_sum_exp(weights.iter().copied()),
        log_h2,
        consistent_log_weights: weights,
    })
}

#[derive(Debug, Clone)]
pub struct Stationary {
    pub states: Vec<Vec<bool>>,
    pub probabilities: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Stationary distribution of the explicitly assembled chain, by power
/// iteration from the uniform distribution.
pub fn exact_stationary(g: &Graph, params: &ModelParams, kind: ChainKind) -> Result<Stationary, OracleError> {
    let p = transition_matrix(g, params, kind, STATIONARY_CAP)?;
    let n = p.len();
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=STATIONARY_MAX_ITERATIONS {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, row) in p.rows.iter().enumerate() {
            for &(j, q) in row {
                next[j] += pi[i] * q;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        residual = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if residual <= STATIONARY_RESIDUAL {
            return Ok(Stationary {
                states: p.states,
                probabilities: pi,
                iterations: it,
                residual,
            });
        }
    }
    Err(OracleError::NonErgodic(residual))
}

pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64, OracleError> {
    if p.len() != q.len() {
        return Err(OracleError::LengthMismatch(p.len(), q.len()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Edge bitmask of a whole-edge configuration.
pub fn edge_mask(edge_spins: &[bool]) -> usize {
    edge_spins
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(e, _)| 1usize << e)
        .sum()
}

/// Empirical distribution of whole-edge samples over edge bitmasks.
pub fn empirical_distribution(m: usize, samples: &[Vec<bool>]) -> Vec<f64> {
    let mut counts = vec![0.0; 1 << m];
    for s in samples {
        counts[edge_mask(s)] += 1.0;
    }
    let total = samples.len().max(1) as f64;
    counts.iter_mut().for_each(|c| *c /= total);
    counts
}
