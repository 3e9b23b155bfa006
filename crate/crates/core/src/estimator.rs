//! Partition-function estimation by a telescoping product over `beta`, and
//! empirical measurement of `H₂/H₀`.
//!
//! `Z_β / Z_{β'} = E_{β'}[exp((β - β') D(σ))]`, where `D(σ)` is the number of
//! bichromatic edges of `L(Γ)`. With steps of at most `1/|E(L(Γ))|` every
//! sampled term lies in `[1, e]`.

use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains::{replica_rng, Chain, ChainError, ChainKind, HalfEdgeState};
use crate::graph::Graph;
use crate::signature::ModelParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("beta = {0} is negative; pass the negative-beta override to run anyway")]
    NegativeBeta(f64),
    #[error("epsilon must be in (0, 1], got {0}")]
    BadEpsilon(f64),
    #[error("parameters must be finite")]
    NonFinite,
    #[error("need at least one replica")]
    NoReplicas,
    #[error("could not build thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// `|E(L(Γ))| = Σ_k C(d_k, 2)`.
pub fn line_graph_edge_count(g: &Graph) -> usize {
    (0..g.vertex_count())
        .map(|k| g.degree(k) * g.degree(k).saturating_sub(1) / 2)
        .sum()
}

/// `log Z_{0,ν}(L(Γ)) = Σ_e log(1 + e^{ν_e})`.
pub fn base_partition(g: &Graph, params: &ModelParams) -> f64 {
    (0..g.edge_count())
        .map(|e| {
            let nu = params.nu(e);
            // log(1 + e^nu) without overflow
            nu.max(0.0) + (-nu.abs()).exp().ln_1p()
        })
        .sum()
}

/// Uniform grid `0 = β_0, ..., β_r = β` with `|β_i - β_{i-1}| ≤ 1/|E(L)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub betas: Vec<f64>,
    pub step_bound: f64,
}

impl AnnealSchedule {
    pub fn uniform(beta: f64, line_edges: usize) -> Self {
        if line_edges == 0 || beta == 0.0 {
            return Self {
                betas: vec![0.0],
                step_bound: f64::INFINITY,
            };
        }
        let step_bound = 1.0 / line_edges as f64;
        let r = (beta.abs() * line_edges as f64).ceil() as usize;
        let mut betas: Vec<f64> = (0..r).map(|i| beta * i as f64 / r as f64).collect();
        betas.push(beta);
        Self { betas, step_bound }
    }

    /// Number of ratios `r`.
    pub fn len(&self) -> usize {
        self.betas.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.betas.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn respects_bound(&self) -> bool {
        self.steps().all(|(a, b)| (b - a).abs() <= self.step_bound * (1.0 + 1e-12))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub mean: f64,
    pub stderr: f64,
}

impl RatioEstimate {
    fn from_terms(terms: &[f64]) -> Self {
        let n = terms.len() as f64;
        if terms.is_empty() {
            return Self { mean: 1.0, stderr: 0.0 };
        }
        let mean = terms.iter().sum::<f64>() / n;
        let var = if terms.len() > 1 {
            terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / n).sqrt(),
        }
    }
}

/// How samples are drawn at one temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    pub chain: ChainKind,
    pub burn_in: u64,
    /// Steps between successive samples.
    pub spacing: u64,
}

impl SamplerSettings {
    /// `8 m² |E(L)|` steps of burn-in, spacing `m`.
    pub fn defaults(g: &Graph, chain: ChainKind) -> Self {
        let m = g.edge_count() as u64;
        Self {
            chain,
            burn_in: 8 * m * m * line_graph_edge_count(g) as u64,
            spacing: m.max(1),
        }
    }
}

fn collect_terms(chain: &mut Chain<'_>, g: &Graph, delta_beta: f64, samples: usize, spacing: u64) -> Vec<f64> {
    (0..samples)
        .map(|_| {
            let state = chain.next_consistent(spacing);
            (delta_beta * state.bichromatic_count(g) as f64).exp()
        })
        .collect()
}

/// Estimates `Z_{β+Δβ}/Z_β` from `samples` draws at `params.beta`, using the
/// default sampler settings.
pub fn estimate_ratio(
    g: &Graph,
    params: &ModelParams,
    delta_beta: f64,
    samples: usize,
    rng: ChaCha8Rng,
) -> Result<RatioEstimate, EstimatorError> {
    estimate_ratio_with(g, params, delta_beta, samples, &SamplerSettings::defaults(g, ChainKind::Glauber), rng)
}

pub fn estimate_ratio_with(
    g: &Graph,
    params: &ModelParams,
    delta_beta: f64,
    samples: usize,
    settings: &SamplerSettings,
    rng: ChaCha8Rng,
) -> Result<RatioEstimate, EstimatorError> {
    if delta_beta == 0.0 {
        return Ok(RatioEstimate { mean: 1.0, stderr: 0.0 });
    }
    let mut chain = Chain::new(g, params.clone(), settings.chain, rng)?;
    chain.run(settings.burn_in);
    let terms = collect_terms(&mut chain, g, delta_beta, samples, settings.spacing);
    Ok(RatioEstimate::from_terms(&terms))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub chain: ChainKind,
    pub seed: u64,
    /// Independent chains per level; their samples are pooled in replica order.
    pub replicas: usize,
    /// Worker threads; 0 uses the rayon default. Does not affect results.
    pub threads: usize,
    /// Overrides `ceil(4 r / ε²)`.
    pub samples_per_level: Option<usize>,
    pub burn_in: Option<u64>,
    pub spacing: Option<u64>,
    pub allow_negative_beta: bool,
}

impl EstimatorConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            chain: ChainKind::Glauber,
            seed,
            replicas: 4,
            threads: 0,
            samples_per_level: None,
            burn_in: None,
            spacing: None,
            allow_negative_beta: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub beta_from: f64,
    pub beta_to: f64,
    pub mean: f64,
    pub stderr: f64,
    pub log_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    #[serde(rename = "log_Z")]
    pub log_z: f64,
    #[serde(rename = "log_Z_base")]
    pub log_z_base: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub chain: ChainKind,
    pub seed: u64,
    pub replicas: usize,
    pub samples_per_level: usize,
    pub burn_in: u64,
    pub spacing: u64,
    pub total_steps: u64,
    pub levels: Vec<LevelReport>,
    /// Excluded from JSON so reports are reproducible byte for byte.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

/// Terms, final state and step count of one replica at one level.
type ReplicaOutcome = Result<(Vec<f64>, HalfEdgeState, u64), ChainError>;

fn split(total: usize, parts: usize) -> Vec<usize> {
    (0..parts)
        .map(|j| total / parts + usize::from(j < total % parts))
        .collect()
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, EstimatorError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| EstimatorError::ThreadPool(e.to_string()))
}

/// Telescoping-product estimate of `log Z_{β,ν}(L(Γ))`.
///
/// Each replica keeps its chain state from one level to the next and runs a
/// fresh burn-in at every new temperature. Replica `j` at level `i` draws from
/// stream `i * replicas + j` of the master seed.
pub fn estimate_z(g: &Graph, params: &ModelParams, epsilon: f64, cfg: &EstimatorConfig) -> Result<EstimateReport, EstimatorError> {
    let started = Instant::now();
    if !params.is_finite() {
        return Err(EstimatorError::NonFinite);
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(EstimatorError::BadEpsilon(epsilon));
    }
    if params.beta < 0.0 && !cfg.allow_negative_beta {
        return Err(EstimatorError::NegativeBeta(params.beta));
    }
    if cfg.replicas == 0 {
        return Err(EstimatorError::NoReplicas);
    }
    let base = base_partition(g, params);
    let schedule = AnnealSchedule::uniform(params.beta, line_graph_edge_count(g));
    let r = schedule.len();
    let defaults = SamplerSettings::defaults(g, cfg.chain);
    let settings = SamplerSettings {
        chain: cfg.chain,
        burn_in: cfg.burn_in.unwrap_or(defaults.burn_in),
        spacing: cfg.spacing.unwrap_or(defaults.spacing).max(1),
    };
    let samples = cfg
        .samples_per_level
        .unwrap_or_else(|| (4.0 * r as f64 / (epsilon * epsilon)).ceil() as usize)
        .max(1);

    let mut report = EstimateReport {
        log_z: base,
        log_z_base: base,
        beta: params.beta,
        epsilon,
        chain: cfg.chain,
        seed: cfg.seed,
        replicas: cfg.replicas,
        samples_per_level: samples,
        burn_in: settings.burn_in,
        spacing: settings.spacing,
        total_steps: 0,
        levels: Vec::with_capacity(r),
        wall_time_secs: 0.0,
    };
    if r == 0 {
        report.wall_time_secs = started.elapsed().as_secs_f64();
        return Ok(report);
    }

    let per_replica = split(samples, cfg.replicas);
    let mut states: Vec<HalfEdgeState> = vec![HalfEdgeState::all_zeros(g); cfg.replicas];
    let workers = pool(cfg.threads)?;
    for (level, (beta_from, beta_to)) in schedule.steps().enumerate() {
        let level_params = params.with_beta(beta_from);
        let delta = beta_to - beta_from;
        let outcomes: Vec<ReplicaOutcome> = workers.install(|| {
            states
                .par_iter()
                .zip(per_replica.par_iter())
                .enumerate()
                .map(|(j, (start, &count))| {
                    let rng = replica_rng(cfg.seed, (level * cfg.replicas + j) as u64);
                    let mut chain = Chain::new(g, level_params.clone(), settings.chain, rng)?
                        .with_state(HalfEdgeState::from_spins(g, &level_params, start.spins().to_vec())?)?;
                    chain.run(settings.burn_in);
                    let terms = collect_terms(&mut chain, g, delta, count, settings.spacing);
                    Ok((terms, chain.state().clone(), chain.stats().steps))
                })
                .collect()
        });
        let mut terms = Vec::with_capacity(samples);
        for (j, outcome) in outcomes.into_iter().enumerate() {
            let (t, state, steps) = outcome?;
            terms.extend(t);
            states[j] = state;
            report.total_steps += steps;
        }
        let est = RatioEstimate::from_terms(&terms);
        let log_ratio = est.mean.ln();
        report.log_z += log_ratio;
        report.levels.push(LevelReport {
            beta_from,
            beta_to,
            mean: est.mean,
            stderr: est.stderr,
            log_ratio,
        });
    }
    report.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaConfig {
    pub steps: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub batches: usize,
}

impl OmegaConfig {
    pub fn new(steps: u64, seed: u64) -> Self {
        Self {
            steps,
            burn_in: steps / 10,
            seed,
            batches: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaRatio {
    /// Time in `Ω₂` over time in `Ω₀`.
    pub ratio: f64,
    /// Batch-means standard error of `ratio`.
    pub stderr: f64,
    pub omega0_fraction: f64,
    /// `2 m² exp(2 (β Δ + max|ν|/2))`.
    pub bound: f64,
    pub steps: u64,
}

/// Upper bound on `H₂/H₀`: the two inconsistent edges can be chosen in at
/// most `m²/2` ways with four patterns, and each such state is within a factor
/// `exp(2 (β Δ + max|μ|))` of a consistent one.
pub fn omega_ratio_bound(g: &Graph, params: &ModelParams) -> f64 {
    let m = g.edge_count() as f64;
    let mu = params.fields.max_abs(g.edge_count()) / 2.0;
    2.0 * m * m * (2.0 * (params.beta * g.max_degree() as f64 + mu)).exp()
}

/// Long-run occupancy estimate of `H₂/H₀` from the half-edge chain.
pub fn measure_omega_ratio(g: &Graph, params: &ModelParams, cfg: &OmegaConfig) -> Result<OmegaRatio, EstimatorError> {
    let mut chain = Chain::new(g, params.clone(), ChainKind::HalfEdge, replica_rng(cfg.seed, 0))?;
    chain.run(cfg.burn_in);
    let batches = cfg.batches.max(2);
    let lengths: Vec<u64> = split(cfg.steps as usize, batches).into_iter().map(|l| l as u64).collect();
    let mut fractions = Vec::with_capacity(batches);
    let mut in_omega2 = 0u64;
    for &len in &lengths {
        let mut count = 0u64;
        for _ in 0..len {
            chain.step();
            if !chain.state().is_consistent() {
                count += 1;
            }
        }
        in_omega2 += count;
        fractions.push(count as f64 / len.max(1) as f64);
    }
    let p = in_omega2 as f64 / cfg.steps.max(1) as f64;
    let b = fractions.len() as f64;
    let mean_f = fractions.iter().sum::<f64>() / b;
    let var = fractions.iter().map(|f| (f - mean_f).powi(2)).sum::<f64>() / (b - 1.0);
    let se_p = (var / b).sqrt();
    let q = 1.0 - p;
    Ok(OmegaRatio {
        ratio: p / q,
        stderr: se_p / (q * q),
        omega0_fraction: q,
        bound: omega_ratio_bound(g, params),
        steps: cfg.steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, path, star};
    use crate::oracle;

    #[test]
    fn base_partition_examples() {
        let p = ModelParams::uniform(1.0, 0.0);
        assert!((base_partition(&path(4), &p) - 8f64.ln()).abs() < 1e-12);
        let p = ModelParams::uniform(0.0, 3f64.ln());
        assert!((base_partition(&path(3), &p) - 2.0 * 4f64.ln()).abs() < 1e-12);
        let p = ModelParams::per_edge(0.0, vec![0.0, 3f64.ln()]);
        assert!((base_partition(&path(3), &p) - (2f64.ln() + 4f64.ln())).abs() < 1e-12);
        let p = ModelParams::uniform(0.0, 800.0);
        assert!((base_partition(&path(2), &p) - 800.0).abs() < 1e-9);
    }

    #[test]
    fn schedule_respects_step_bound() {
        let s = AnnealSchedule::uniform(0.7, 24);
        assert_eq!(s.len(), 17);
        assert_eq!(s.betas[0], 0.0);
        assert_eq!(*s.betas.last().unwrap(), 0.7);
        assert!(s.respects_bound());
        assert!(AnnealSchedule::uniform(0.0, 24).is_empty());
        let neg = AnnealSchedule::uniform(-0.5, 6);
        assert_eq!(neg.len(), 3);
        assert!(neg.respects_bound());
    }

    #[test]
    fn zero_step_is_exact() {
        let g = cycle(4).unwrap();
        let est = estimate_ratio(&g, &ModelParams::uniform(0.5, 0.0), 0.0, 100, replica_rng(1, 0)).unwrap();
        assert_eq!(est, RatioEstimate { mean: 1.0, stderr: 0.0 });
    }

    #[test]
    fn ratio_on_two_vertex_line_graph() {
        // L(P_3) = K_2: Z_β = 2 + 2 e^β
        let g = path(3);
        let est = estimate_ratio(&g, &ModelParams::uniform(0.0, 0.0), 0.5, 10_000, replica_rng(2, 0)).unwrap();
        let truth = (2.0 + 2.0 * 0.5f64.exp()) / 4.0;
        assert!((est.mean - truth).abs() <= 3.0 * est.stderr, "{est:?} vs {truth}");
    }

    #[test]
    fn exact_ratios_telescope() {
        let params = ModelParams::uniform(1.3, 0.4);
        for g in [path(4), cycle(5).unwrap(), star(4)] {
            let schedule = AnnealSchedule::uniform(params.beta, line_graph_edge_count(&g));
            let mut total = base_partition(&g, &params);
            for (a, b) in schedule.steps() {
                // exact Gibbs expectation of exp((b - a) D)
                let gibbs = oracle::exact_gibbs(&g, &params.with_beta(a)).unwrap();
                let m = g.edge_count();
                let ratio: f64 = gibbs
                    .iter()
                    .enumerate()
                    .map(|(mask, p)| {
                        let spins = oracle::consistent_spins(m, mask as u64);
                        let s = HalfEdgeState::from_spins(&g, &params, spins).unwrap();
                        p * ((b - a) * s.bichromatic_count(&g) as f64).exp()
                    })
                    .sum();
                total += ratio.ln();
            }
            let exact = oracle::exact_h0(&g, &params).unwrap();
            assert!((total - exact).abs() <= 1e-9 * exact.abs());
        }
    }

    #[test]
    fn zero_beta_returns_base() {
        let g = cycle(6).unwrap();
        let params = ModelParams::uniform(0.0, 0.5);
        let report = estimate_z(&g, &params, 0.1, &EstimatorConfig::new(1)).unwrap();
        assert_eq!(report.log_z, base_partition(&g, &params));
        assert!(report.levels.is_empty());
    }

    #[test]
    fn negative_beta_needs_override() {
        let g = cycle(4).unwrap();
        let params = ModelParams::uniform(-0.3, 0.0);
        let mut cfg = EstimatorConfig::new(1);
        assert_eq!(estimate_z(&g, &params, 0.2, &cfg), Err(EstimatorError::NegativeBeta(-0.3)));
        cfg.allow_negative_beta = true;
        cfg.samples_per_level = Some(2000);
        let report = estimate_z(&g, &params, 0.2, &cfg).unwrap();
        let exact = oracle::exact_h0(&g, &params).unwrap();
        assert!((report.log_z - exact).abs() < 0.1);
        assert!(report.levels.iter().all(|l| l.mean <= 1.0));
    }

    #[test]
    fn thread_count_does_not_matter() {
        let g = cycle(5).unwrap();
        let params = ModelParams::uniform(0.8, 0.2);
        let mut cfg = EstimatorConfig::new(11);
        cfg.samples_per_level = Some(300);
        cfg.threads = 1;
        let a = estimate_z(&g, &params, 0.2, &cfg).unwrap();
        cfg.threads = 3;
        let b = estimate_z(&g, &params, 0.2, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn omega_ratio_at_infinite_temperature() {
        let g = star(4);
        let params = ModelParams::uniform(0.0, 0.0);
        let r = measure_omega_ratio(&g, &params, &OmegaConfig::new(200_000, 3)).unwrap();
        // H₂/H₀ = C(4, 2)
        assert!((r.ratio - 6.0).abs() <= 4.0 * r.stderr, "{r:?}");
        assert!(r.ratio <= r.bound);
    }
}
