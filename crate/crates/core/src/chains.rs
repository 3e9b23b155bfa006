//! Markov chains on half-edge configurations.
//!
//! The state space is `Ω = Ω₀ ∪ Ω₂`: configurations consistent on every edge,
//! or on all but exactly two. The half-edge chain proposes a uniformly random
//! unordered pair of half-edges with probability `1/(4m²)` and applies the
//! Metropolis filter; proposals that would leave `Ω` are censored to a loop.
//! Glauber dynamics never leaves `Ω₀`: it flips both halves of a uniformly
//! chosen edge with probability `1/(2m)` times the Metropolis ratio.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::signature::{log_weight, log_weight_delta, ones_at_vertices, ModelParams};

/// Steps between full recomputations of the cached log-weight.
pub const CACHE_REFRESH_INTERVAL: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("Glauber dynamics needs a consistent state ({0} inconsistent edges)")]
    NotConsistent(usize),
    #[error("configuration has {0} inconsistent edges; the chain lives on 0 or 2")]
    OutsideStateSpace(usize),
    #[error("expected {expected} spins, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("state space has {size} states, above the cap of {cap}")]
    TooLarge { size: u128, cap: usize },
    #[error("unknown chain kind `{0}` (expected `half-edge` or `glauber`)")]
    UnknownKind(String),
    #[error("graph has no edges")]
    NoEdges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainKind {
    HalfEdge,
    Glauber,
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainKind::HalfEdge => "half-edge",
            ChainKind::Glauber => "glauber",
        })
    }
}

impl FromStr for ChainKind {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "half-edge" | "half_edge" | "halfedge" => Ok(ChainKind::HalfEdge),
            "glauber" => Ok(ChainKind::Glauber),
            other => Err(ChainError::UnknownKind(other.to_string())),
        }
    }
}

/// Half-edge spins with incrementally maintained per-vertex one-counts,
/// inconsistent edges and log-weight.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfEdgeState {
    spins: Vec<bool>,
    ones: Vec<u32>,
    inconsistent: Vec<usize>,
    log_weight: f64,
}

impl HalfEdgeState {
    pub fn all_zeros(g: &Graph) -> Self {
        Self {
            spins: vec![false; g.half_edge_count()],
            ones: vec![0; g.vertex_count()],
            inconsistent: Vec::new(),
            log_weight: 0.0,
        }
    }

    pub fn from_edge_spins(g: &Graph, params: &ModelParams, edge_spins: &[bool]) -> Result<Self, ChainError> {
        if edge_spins.len() != g.edge_count() {
            return Err(ChainError::WrongLength {
                expected: g.edge_count(),
                got: edge_spins.len(),
            });
        }
        let spins = edge_spins.iter().flat_map(|&s| [s, s]).collect();
        Self::from_spins(g, params, spins)
    }

    pub fn from_spins(g: &Graph, params: &ModelParams, spins: Vec<bool>) -> Result<Self, ChainError> {
        if spins.len() != g.half_edge_count() {
            return Err(ChainError::WrongLength {
                expected: g.half_edge_count(),
                got: spins.len(),
            });
        }
        let inconsistent: Vec<usize> = (0..g.edge_count())
            .filter(|&e| spins[2 * e] != spins[2 * e + 1])
            .collect();
        if !(inconsistent.is_empty() || inconsistent.len() == 2) {
            return Err(ChainError::OutsideStateSpace(inconsistent.len()));
        }
        Ok(Self {
            ones: ones_at_vertices(g, &spins),
            log_weight: log_weight(g, params, &spins),
            spins,
            inconsistent,
        })
    }

    pub fn spins(&self) -> &[bool] {
        &self.spins
    }

    pub fn ones(&self) -> &[u32] {
        &self.ones
    }

    pub fn inconsistent_edges(&self) -> &[usize] {
        &self.inconsistent
    }

    #[inline]
    pub fn is_consistent(&self) -> bool {
        self.inconsistent.is_empty()
    }

    #[inline]
    pub fn log_weight(&self) -> f64 {
        self.log_weight
    }

    /// Whole-edge reading of a consistent state.
    pub fn edge_spins(&self) -> Option<Vec<bool>> {
        self.is_consistent()
            .then(|| self.spins.iter().step_by(2).copied().collect())
    }

    /// `Σ_k o_k (d_k - o_k)`: on a consistent state, the number of
    /// bichromatic edges of the line graph.
    pub fn bichromatic_count(&self, g: &Graph) -> u64 {
        self.ones
            .iter()
            .enumerate()
            .map(|(k, &o)| o as u64 * (g.degree(k) as u64 - o as u64))
            .sum()
    }

    /// Number of inconsistent edges after flipping `h1 != h2`.
    fn inconsistency_after(&self, h1: usize, h2: usize) -> usize {
        let (e1, e2) = (h1 / 2, h2 / 2);
        let mut count = self.inconsistent.len() as isize;
        if e1 != e2 {
            for e in [e1, e2] {
                count += if self.inconsistent.contains(&e) { -1 } else { 1 };
            }
        }
        count as usize
    }

    fn flip(&mut self, g: &Graph, h1: usize, h2: usize, delta: f64) {
        for h in [h1, h2] {
            let k = g.owner(h);
            if self.spins[h] {
                self.ones[k] -= 1;
            } else {
                self.ones[k] += 1;
            }
            self.spins[h] = !self.spins[h];
        }
        let (e1, e2) = (h1 / 2, h2 / 2);
        if e1 != e2 {
            for e in [e1, e2] {
                if let Some(pos) = self.inconsistent.iter().position(|&x| x == e) {
                    self.inconsistent.swap_remove(pos);
                } else {
                    self.inconsistent.push(e);
                }
            }
            self.inconsistent.sort_unstable();
        }
        self.log_weight += delta;
        debug_assert!(self.inconsistent.is_empty() || self.inconsistent.len() == 2);
    }

    /// Recomputes the cached log-weight; returns the drift that was removed.
    pub fn refresh(&mut self, g: &Graph, params: &ModelParams) -> f64 {
        let exact = log_weight(g, params, &self.spins);
        let drift = (exact - self.log_weight).abs();
        self.log_weight = exact;
        drift
    }

    /// Checks the cached counters against the spins.
    pub fn is_coherent(&self, g: &Graph) -> bool {
        let inconsistent: Vec<usize> = (0..g.edge_count())
            .filter(|&e| self.spins[2 * e] != self.spins[2 * e + 1])
            .collect();
        self.ones == ones_at_vertices(g, &self.spins) && inconsistent == self.inconsistent
    }
}

/// What a single step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Diagonal draw (`h1 == h2`) or the laziness coin.
    Lazy,
    /// The proposal would have left the state space.
    Censored,
    Rejected,
    Accepted,
}

/// Metropolis acceptance for flipping `{h1, h2}`: `None` when the result
/// would have four inconsistent edges, otherwise `(min(1, ŵ'/ŵ), log ŵ'/ŵ)`.
pub fn half_edge_acceptance(
    g: &Graph,
    params: &ModelParams,
    state: &HalfEdgeState,
    h1: usize,
    h2: usize,
) -> Option<(f64, f64)> {
    if state.inconsistency_after(h1, h2) > 2 {
        return None;
    }
    let delta = log_weight_delta(g, params, &state.spins, &state.ones, h1, h2);
    Some((delta.min(0.0).exp(), delta))
}

#[inline]
fn metropolis<R: Rng + ?Sized>(delta: f64, rng: &mut R) -> bool {
    delta >= 0.0 || rng.gen::<f64>() < delta.exp()
}

/// One step of the half-edge chain.
pub fn half_edge_step<R: Rng + ?Sized>(
    g: &Graph,
    params: &ModelParams,
    state: &mut HalfEdgeState,
    rng: &mut R,
) -> Move {
    let hm = g.half_edge_count();
    let h1 = rng.gen_range(0..hm);
    let h2 = rng.gen_range(0..hm);
    if h1 == h2 || rng.gen::<bool>() {
        return Move::Lazy;
    }
    match half_edge_acceptance(g, params, state, h1, h2) {
        None => Move::Censored,
        Some((_, delta)) => {
            if metropolis(delta, rng) {
                state.flip(g, h1, h2, delta);
                Move::Accepted
            } else {
                Move::Rejected
            }
        }
    }
}

/// One step of Glauber dynamics; the state must be consistent.
pub fn glauber_step<R: Rng + ?Sized>(
    g: &Graph,
    params: &ModelParams,
    state: &mut HalfEdgeState,
    rng: &mut R,
) -> Result<Move, ChainError> {
    if !state.is_consistent() {
        return Err(ChainError::NotConsistent(state.inconsistent.len()));
    }
    if rng.gen::<bool>() {
        return Ok(Move::Lazy);
    }
    let e = rng.gen_range(0..g.edge_count());
    let delta = log_weight_delta(g, params, &state.spins, &state.ones, 2 * e, 2 * e + 1);
    if metropolis(delta, rng) {
        state.flip(g, 2 * e, 2 * e + 1, delta);
        Ok(Move::Accepted)
    } else {
        Ok(Move::Rejected)
    }
}

/// RNG for replica `replica` of a run seeded with `master_seed`; replicas use
/// disjoint ChaCha streams.
pub fn replica_rng(master_seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ChainStats {
    pub steps: u64,
    pub lazy: u64,
    pub censored: u64,
    pub rejected: u64,
    pub accepted: u64,
    pub max_cache_drift: f64,
}

impl ChainStats {
    /// Accepted over Metropolis-evaluated proposals.
    pub fn acceptance_rate(&self) -> f64 {
        let evaluated = self.accepted + self.rejected;
        if evaluated == 0 {
            1.0
        } else {
            self.accepted as f64 / evaluated as f64
        }
    }
}

/// A chain instance owning its state and RNG.
#[derive(Debug, Clone)]
pub struct Chain<'g> {
    graph: &'g Graph,
    params: ModelParams,
    kind: ChainKind,
    state: HalfEdgeState,
    rng: ChaCha8Rng,
    stats: ChainStats,
    since_refresh: u64,
}

impl<'g> Chain<'g> {
    /// Starts from the all-zero configuration.
    pub fn new(graph: &'g Graph, params: ModelParams, kind: ChainKind, rng: ChaCha8Rng) -> Result<Self, ChainError> {
        if graph.edge_count() == 0 {
            return Err(ChainError::NoEdges);
        }
        Ok(Self {
            state: HalfEdgeState::all_zeros(graph),
            graph,
            params,
            kind,
            rng,
            stats: ChainStats::default(),
            since_refresh: 0,
        })
    }

    pub fn with_state(mut self, state: HalfEdgeState) -> Result<Self, ChainError> {
        if self.kind == ChainKind::Glauber && !state.is_consistent() {
            return Err(ChainError::NotConsistent(state.inconsistent.len()));
        }
        self.state = state;
        Ok(self)
    }

    pub fn state(&self) -> &HalfEdgeState {
        &self.state
    }

    pub fn stats(&self) -> &ChainStats {
        &self.stats
    }

    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    pub fn step(&mut self) -> Move {
        let mv = match self.kind {
            ChainKind::HalfEdge => half_edge_step(self.graph, &self.params, &mut self.state, &mut self.rng),
            ChainKind::Glauber => glauber_step(self.graph, &self.params, &mut self.state, &mut self.rng)
                .expect("Glauber chain stays in the consistent states"),
        };
        self.stats.steps += 1;
        match mv {
            Move::Lazy => self.stats.lazy += 1,
            Move::Censored => self.stats.censored += 1,
            Move::Rejected => self.stats.rejected += 1,
            Move::Accepted => self.stats.accepted += 1,
        }
        self.since_refresh += 1;
        if self.since_refresh >= CACHE_REFRESH_INTERVAL {
            let drift = self.state.refresh(self.graph, &self.params);
            self.stats.max_cache_drift = self.stats.max_cache_drift.max(drift);
            self.since_refresh = 0;
        }
        mv
    }

    pub fn run(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }

    /// Runs blocks of `spacing` steps until a block ends in `Ω₀`.
    ///
    /// The state is only inspected at block boundaries: stopping at the first
    /// visit to `Ω₀` instead would favour states with long excursions into
    /// `Ω₂` and bias the output away from the Gibbs distribution.
    pub fn next_consistent(&mut self, spacing: u64) -> &HalfEdgeState {
        loop {
            self.run(spacing.max(1));
            if self.state.is_consistent() {
                return &self.state;
            }
        }
    }
}

/// Initial configuration for [`run_chain`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub enum InitialState {
    #[default]
    AllZeros,
    EdgeSpins(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub kind: ChainKind,
    /// Recorded steps after burn-in.
    pub steps: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// A sample is taken every `thin` recorded steps (when consistent).
    pub thin: u64,
    pub initial: InitialState,
}

impl ChainConfig {
    pub fn new(kind: ChainKind, steps: u64, seed: u64) -> Self {
        Self {
            kind,
            steps,
            burn_in: 0,
            seed,
            thin: 1,
            initial: InitialState::AllZeros,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRun {
    pub kind: ChainKind,
    pub seed: u64,
    /// Whole-edge configurations, one per thinning point that fell in `Ω₀`.
    pub samples: Vec<Vec<bool>>,
    /// Recorded steps that ended in `Ω₀` / `Ω₂`.
    pub omega0_steps: u64,
    pub omega2_steps: u64,
    pub acceptance_rate: f64,
    pub stats: ChainStats,
}

impl ChainRun {
    pub fn omega0_fraction(&self) -> f64 {
        let total = self.omega0_steps + self.omega2_steps;
        if total == 0 {
            1.0
        } else {
            self.omega0_steps as f64 / total as f64
        }
    }
}

/// Runs one chain; deterministic given `(g, params, cfg)`.
pub fn run_chain(g: &Graph, params: &ModelParams, cfg: &ChainConfig) -> Result<ChainRun, ChainError> {
    let mut chain = Chain::new(g, params.clone(), cfg.kind, replica_rng(cfg.seed, 0))?;
    if let InitialState::EdgeSpins(spins) = &cfg.initial {
        chain = chain.with_state(HalfEdgeState::from_edge_spins(g, params, spins)?)?;
    }
    chain.run(cfg.burn_in);
    let thin = cfg.thin.max(1);
    let mut samples = Vec::new();
    let (mut omega0, mut omega2) = (0u64, 0u64);
    for t in 1..=cfg.steps {
        chain.step();
        if chain.state().is_consistent() {
            omega0 += 1;
            if t % thin == 0 {
                samples.push(chain.state().edge_spins().unwrap());
            }
        } else {
            omega2 += 1;
        }
    }
    Ok(ChainRun {
        kind: cfg.kind,
        seed: cfg.seed,
        samples,
        omega0_steps: omega0,
        omega2_steps: omega2,
        acceptance_rate: chain.stats().acceptance_rate(),
        stats: chain.stats().clone(),
    })
}

/// Runs the half-edge chain from all-zeros for `total_steps`; if it stops in
/// `Ω₂`, runs further blocks of `total_steps` until one ends in `Ω₀`. Returns
/// the edge spins.
pub fn sample_gibbs(g: &Graph, params: &ModelParams, total_steps: u64, rng: &mut ChaCha8Rng) -> Result<Vec<bool>, ChainError> {
    let mut chain = Chain::new(g, params.clone(), ChainKind::HalfEdge, rng.clone())?;
    chain.next_consistent(total_steps);
    let out = chain.state().edge_spins().unwrap();
    *rng = chain.rng;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub kind: ChainKind,
    pub samples: usize,
    /// Steps between sample checks; a check that lands in `Ω₂` is skipped
    /// and the next block is tried.
    pub spacing: u64,
    pub burn_in: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRun {
    #[serde(skip)]
    pub samples: Vec<Vec<bool>>,
    pub kind: ChainKind,
    pub seed: u64,
    pub samples_drawn: usize,
    /// Post-burn-in steps that ended in `Ω₀` / `Ω₂`.
    pub omega0_steps: u64,
    pub omega2_steps: u64,
    pub omega0_fraction: f64,
    pub acceptance_rate: f64,
    pub stats: ChainStats,
}

/// Draws `cfg.samples` whole-edge configurations from one chain.
pub fn draw_samples(g: &Graph, params: &ModelParams, cfg: &SampleConfig) -> Result<SampleRun, ChainError> {
    let mut chain = Chain::new(g, params.clone(), cfg.kind, replica_rng(cfg.seed, 0))?;
    chain.run(cfg.burn_in);
    let (mut omega0, mut omega2) = (0u64, 0u64);
    let mut samples = Vec::with_capacity(cfg.samples);
    let mut tally = |chain: &Chain<'_>| {
        if chain.state().is_consistent() {
            omega0 += 1;
        } else {
            omega2 += 1;
        }
    };
    for _ in 0..cfg.samples {
        loop {
            for _ in 0..cfg.spacing.max(1) {
                chain.step();
                tally(&chain);
            }
            if chain.state().is_consistent() {
                break;
            }
        }
        samples.push(chain.state().edge_spins().unwrap());
    }
    let total = (omega0 + omega2).max(1);
    Ok(SampleRun {
        samples_drawn: samples.len(),
        samples,
        kind: cfg.kind,
        seed: cfg.seed,
        omega0_steps: omega0,
        omega2_steps: omega2,
        omega0_fraction: omega0 as f64 / total as f64,
        acceptance_rate: chain.stats().acceptance_rate(),
        stats: chain.stats().clone(),
    })
}

/// Explicit transition matrix of a chain on a small instance, assembled by
/// evaluating the step kernel on every state and every proposal.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    /// Half-edge spins of each state.
    pub states: Vec<Vec<bool>>,
    /// Sparse rows `(target, probability)`, diagonal included.
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .filter(|(t, _)| *t == j)
            .map(|(_, p)| p)
            .sum()
    }

    /// Dense copy; only sensible for a few thousand states.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut dense = vec![vec![0.0; n]; n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                dense[i][j] += p;
            }
        }
        dense
    }
}

/// Consistent configurations of `g` in edge-bitmask order.
pub fn consistent_states(g: &Graph) -> Vec<Vec<bool>> {
    let m = g.edge_count();
    (0u64..1 << m)
        .map(|mask| (0..2 * m).map(|h| mask >> (h / 2) & 1 == 1).collect())
        .collect()
}

/// Configurations inconsistent on exactly two edges.
pub fn nearly_consistent_states(g: &Graph) -> Vec<Vec<bool>> {
    let m = g.edge_count();
    let mut out = Vec::new();
    for e in 0..m {
        for f in e + 1..m {
            for pattern in 0..4u8 {
                for rest in 0u64..1 << (m - 2) {
                    let mut spins = vec![false; 2 * m];
                    let mut bit = 0;
                    for x in 0..m {
                        if x == e || x == f {
                            continue;
                        }
                        let s = rest >> bit & 1 == 1;
                        spins[2 * x] = s;
                        spins[2 * x + 1] = s;
                        bit += 1;
                    }
                    // the first half-edge takes the pattern bit, the second its complement
                    let (pe, pf) = (pattern & 1 == 1, pattern & 2 == 2);
                    spins[2 * e] = pe;
                    spins[2 * e + 1] = !pe;
                    spins[2 * f] = pf;
                    spins[2 * f + 1] = !pf;
                    out.push(spins);
                }
            }
        }
    }
    out
}

pub fn state_space_size(g: &Graph, kind: ChainKind) -> u128 {
    let m = g.edge_count() as u32;
    let omega0 = 1u128 << m;
    match kind {
        ChainKind::Glauber => omega0,
        ChainKind::HalfEdge if m >= 2 => {
            omega0 + (m as u128 * (m as u128 - 1) / 2) * 4 * (1u128 << (m - 2))
        }
        ChainKind::HalfEdge => omega0,
    }
}

pub fn transition_matrix(
    g: &Graph,
    params: &ModelParams,
    kind: ChainKind,
    cap: usize,
) -> Result<TransitionMatrix, ChainError> {
    let size = state_space_size(g, kind);
    if size > cap as u128 {
        return Err(ChainError::TooLarge { size, cap });
    }
    if g.edge_count() == 0 {
        return Err(ChainError::NoEdges);
    }
    let mut states = consistent_states(g);
    if kind == ChainKind::HalfEdge {
        states.extend(nearly_consistent_states(g));
    }
    let index: HashMap<Vec<bool>, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let m = g.edge_count();
    let hm = 2 * m;
    let mut rows = Vec::with_capacity(states.len());
    for (i, spins) in states.iter().enumerate() {
        let state = HalfEdgeState::from_spins(g, params, spins.clone())?;
        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut leave = 0.0;
        let mut push = |target: Vec<bool>, p: f64, row: &mut Vec<(usize, f64)>| {
            let j = index[&target];
            row.push((j, p));
            leave += p;
        };
        match kind {
            ChainKind::HalfEdge => {
                let proposal = 0.5 / (hm * hm) as f64;
                for h1 in 0..hm {
                    for h2 in 0..hm {
                        if h1 == h2 {
                            continue;
                        }
                        if let Some((acc, _)) = half_edge_acceptance(g, params, &state, h1, h2) {
                            let mut target = spins.clone();
                            target[h1] ^= true;
                            target[h2] ^= true;
                            push(target, proposal * acc, &mut row);
                        }
                    }
                }
            }
            ChainKind::Glauber => {
                let proposal = 0.5 / m as f64;
                for e in 0..m {
                    let (acc, _) = half_edge_acceptance(g, params, &state, 2 * e, 2 * e + 1)
                        .expect("whole-edge flips keep consistency");
                    let mut target = spins.clone();
                    target[2 * e] ^= true;
                    target[2 * e + 1] ^= true;
                    push(target, proposal * acc, &mut row);
                }
            }
        }
        row.push((i, 1.0 - leave));
        // merge duplicate targets (ordered pairs hit each unordered pair twice)
        row.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (j, p) in row {
            match merged.last_mut() {
                Some((last, q)) if *last == j => *q += p,
                _ => merged.push((j, p)),
            }
        }
        rows.push(merged);
    }
    Ok(TransitionMatrix { states, rows })
}
