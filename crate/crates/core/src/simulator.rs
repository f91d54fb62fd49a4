//! Replays query streams against storage policies and sweeps storage capacity.
//!
//! Latency is one time unit for a hit and `depth` units (one per rule application) for a
//! miss. Energy is the Landauer cost of every rule application plus the maintenance cost
//! of the stored bits over the measured part of the stream.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, Query};
use crate::metrics::{ContentIndex, InfoModel};
use crate::num::{bits_to_nats, nats_to_bits};
use crate::policies::{
    cache_step, threshold_plan, truemi_select, Cache, Capacity, FrequencySource, PolicyKind, StoragePlan,
};
use crate::thermo::{
    landauer_compute_energy, storage_maintenance_energy, triality_check, CostBreakdown, ThermoParams, TrialityCheck,
};
use crate::workload::{sample_stream, DistKind, QueryDistribution};

/// Default share of the stream used to warm caches before statistics are collected.
pub const DEFAULT_WARMUP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageSize {
    /// Number of cached answers.
    Capacity(usize),
    /// Fraction `β ∈ [0, 1]` of the distinct queries.
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub policy: PolicyKind,
    pub storage: StorageSize,
    pub warmup_fraction: f64,
    /// Latency of a hit in time units; a miss costs its depth.
    pub hit_latency: f64,
    pub thermo: ThermoParams<f64>,
}

impl SimConfig {
    pub fn new(policy: PolicyKind, storage: StorageSize) -> Self {
        SimConfig {
            policy,
            storage,
            warmup_fraction: DEFAULT_WARMUP,
            hit_latency: 1.0,
            thermo: ThermoParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        self.thermo.validate()?;
        if let StorageSize::Fraction(b) = self.storage {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::invalid(format!("storage fraction {b} outside [0, 1]")));
            }
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::invalid("warmup_fraction must be in [0, 1)"));
        }
        if !(self.hit_latency >= 0.0) {
            return Err(Error::invalid("hit_latency must be non-negative"));
        }
        Ok(())
    }
}

/// Read-only state shared by every run over one workload: content profiles, the query
/// distribution and the sampled stream.
#[derive(Debug, Clone)]
pub struct SimContext {
    index: ContentIndex,
    dist: QueryDistribution,
    stream: Vec<Query>,
    // Indexed by query id.
    depth: Vec<u64>,
    answer_bits: Vec<f64>,
}

impl SimContext {
    pub fn new(
        kb: &KnowledgeBase,
        dist: QueryDistribution,
        model: &InfoModel,
        stream_length: usize,
        stream_seed: u64,
    ) -> Result<Self> {
        if stream_length == 0 {
            return Err(Error::invalid("stream_length must be >= 1"));
        }
        let index = ContentIndex::build(kb, dist.queries(), model)?;
        let stream = sample_stream(&dist, stream_length, stream_seed);
        Self::from_parts(index, dist, stream)
    }

    /// Builds a context around an explicit stream.
    pub fn from_parts(index: ContentIndex, dist: QueryDistribution, stream: Vec<Query>) -> Result<Self> {
        let max_id = dist.queries().iter().map(|q| q.query_id).max().unwrap_or(0) as usize;
        let mut depth = vec![0; max_id + 1];
        let mut answer_bits = vec![0.0; max_id + 1];
        for q in dist.queries() {
            let p = index.profile(q.query_id).ok_or(Error::Unanswerable { query: q.query_id })?;
            depth[q.query_id as usize] = p.depth;
            answer_bits[q.query_id as usize] = nats_to_bits(p.h_q);
        }
        if let Some(bad) = stream.iter().find(|q| dist.position(q.query_id).is_none()) {
            return Err(Error::invalid(format!("stream query {} is not in the distribution", bad.query_id)));
        }
        Ok(SimContext {
            index,
            dist,
            stream,
            depth,
            answer_bits,
        })
    }

    pub fn index(&self) -> &ContentIndex {
        &self.index
    }

    pub fn dist(&self) -> &QueryDistribution {
        &self.dist
    }

    pub fn stream(&self) -> &[Query] {
        &self.stream
    }

    pub fn query_count(&self) -> usize {
        self.dist.len()
    }

    pub fn depth_of(&self, query_id: u32) -> u64 {
        self.depth[query_id as usize]
    }

    /// `Σ f_q depth_q`.
    pub fn mean_depth(&self) -> f64 {
        self.dist.iter().map(|(q, f)| f * self.depth_of(q.query_id) as f64).sum()
    }

    /// `Σ f_q H_q`, bits.
    pub fn expected_content_bits(&self) -> f64 {
        self.dist
            .iter()
            .map(|(q, f)| f * self.answer_bits[q.query_id as usize])
            .sum()
    }

    /// Number of cached answers for `storage`, clamped to the query universe.
    pub fn capacity_for(&self, storage: StorageSize) -> usize {
        let n = self.query_count();
        match storage {
            StorageSize::Fraction(b) => ((b * n as f64).round() as usize).min(n),
            StorageSize::Capacity(c) => {
                if c > n {
                    log::warn!("capacity {c} exceeds the {n} distinct queries; clamping");
                }
                c.min(n)
            }
        }
    }

    /// The cache a run starts from: empty for online policies, a fixed plan otherwise.
    pub fn initial_cache(&self, policy: PolicyKind, capacity: usize) -> Result<Cache> {
        if capacity == 0 {
            return Ok(Cache::fixed([]));
        }
        match policy {
            PolicyKind::Lru
            | PolicyKind::Lfu
            | PolicyKind::FreqDepth {
                frequency: FrequencySource::Decayed { .. },
            } => Cache::new(policy, capacity),
            PolicyKind::FreqDepth {
                frequency: FrequencySource::Oracle,
            } => Ok(Cache::fixed(self.oracle_freq_depth(capacity))),
            PolicyKind::TrueMi => {
                // Selection ignores access frequencies: every candidate weighs the same.
                let uniform = QueryDistribution::from_weights(
                    self.dist.queries().to_vec(),
                    vec![1.0; self.dist.len()],
                    DistKind::Uniform,
                )?;
                let plan = truemi_select(&self.index, self.dist.queries(), &uniform, Capacity::Entries(capacity))?;
                Ok(Cache::fixed(self.plan_queries(&plan)))
            }
            PolicyKind::Threshold { tau_scale } => {
                let plan = threshold_plan(
                    &self.index,
                    &self.dist,
                    self.stream.len() as f64,
                    tau_scale,
                    Capacity::Entries(capacity),
                )?;
                Ok(Cache::fixed(self.plan_queries(&plan)))
            }
        }
    }

    /// Top `capacity` queries by `f_q · depth`, ties to the lower query id.
    pub fn oracle_freq_depth(&self, capacity: usize) -> Vec<u32> {
        let mut scored: Vec<(f64, u32)> = self
            .dist
            .iter()
            .map(|(q, f)| (f * self.depth_of(q.query_id) as f64, q.query_id))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.into_iter().take(capacity).map(|(_, id)| id).collect()
    }

    fn plan_queries(&self, plan: &StoragePlan) -> Vec<u32> {
        self.dist
            .queries()
            .iter()
            .filter(|q| plan.has_answer(q.target))
            .map(|q| q.query_id)
            .collect()
    }

    fn bits_of(&self, ids: impl IntoIterator<Item = u32>) -> f64 {
        ids.into_iter().map(|id| self.answer_bits[id as usize]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub policy: String,
    pub capacity: usize,
    /// Accesses counted after warm-up.
    pub accesses: u64,
    pub hits: u64,
    pub misses: u64,
    pub hit_rate: f64,
    pub mean_latency: f64,
    pub total_latency: f64,
    pub total_compute_steps: u64,
    /// Time-averaged stored bits over the measured accesses.
    pub plan_bits: f64,
    pub energy: f64,
    pub compute_energy: f64,
    pub storage_energy: f64,
    /// Nats per access: stored content spread over the measured accesses plus the
    /// average derivation entropy of misses.
    pub amortized_cost: f64,
    pub cost: CostBreakdown<f64>,
    pub triality: Option<TrialityCheck<f64>>,
}

/// Replays the context's stream under `cfg`.
pub fn run_stream(ctx: &SimContext, cfg: &SimConfig) -> Result<SimMetrics> {
    cfg.validate()?;
    let capacity = ctx.capacity_for(cfg.storage);
    let mut cache = ctx.initial_cache(cfg.policy, capacity)?;
    let warmup = (ctx.stream.len() as f64 * cfg.warmup_fraction).floor() as usize;

    let mut stored_bits = ctx.bits_of(cache.contents());
    let (mut hits, mut misses, mut steps) = (0u64, 0u64, 0u64);
    let mut latency = 0.0;
    let mut bit_steps = 0.0;
    for (i, &q) in ctx.stream.iter().enumerate() {
        let depth = ctx.depth_of(q.query_id);
        let out = cache_step(&mut cache, q, depth);
        if out.admitted {
            stored_bits += ctx.answer_bits[q.query_id as usize];
        }
        if let Some(victim) = out.evicted {
            stored_bits -= ctx.answer_bits[victim as usize];
        }
        if i < warmup {
            continue;
        }
        if out.hit {
            hits += 1;
            latency += cfg.hit_latency;
        } else {
            misses += 1;
            steps += depth;
            latency += depth as f64;
        }
        bit_steps += stored_bits.max(0.0);
    }

    let accesses = hits + misses;
    let n = accesses.max(1) as f64;
    let plan_bits = bit_steps / n;
    let duration = n * cfg.thermo.t_avg.unwrap_or(1.0);
    let compute_energy = landauer_compute_energy(steps, &cfg.thermo);
    let storage_energy = storage_maintenance_energy(plan_bits, duration, &cfg.thermo)?;
    let energy = compute_energy + storage_energy;
    let storage_term = bits_to_nats(plan_bits) / n;
    let compute_term = bits_to_nats(steps as f64) / n;
    let cost = CostBreakdown::new(energy, latency, plan_bits, storage_term, compute_term)?;
    let triality = if plan_bits > 0.0 {
        Some(triality_check(energy, latency, plan_bits, ctx.expected_content_bits(), &cfg.thermo)?)
    } else {
        None
    };
    Ok(SimMetrics {
        policy: cfg.policy.name().to_string(),
        capacity,
        accesses,
        hits,
        misses,
        hit_rate: hits as f64 / n,
        mean_latency: latency / n,
        total_latency: latency,
        total_compute_steps: steps,
        plan_bits,
        energy,
        compute_energy,
        storage_energy,
        amortized_cost: cost.amortized,
        cost,
        triality,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub beta: f64,
    pub metrics: SimMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// `ΔL/Δβ` between consecutive points.
    pub gradient: Vec<f64>,
    pub transition_beta: Option<f64>,
}

impl SweepResult {
    pub fn betas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.beta).collect()
    }

    pub fn latencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.metrics.mean_latency).collect()
    }
}

/// One run per storage fraction, all on the same stream, evaluated in parallel and
/// collected in input order.
pub fn sweep_storage(ctx: &SimContext, template: &SimConfig, betas: &[f64], noise_floor: f64) -> Result<SweepResult> {
    if betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
        return Err(Error::invalid("storage fractions must lie in [0, 1]"));
    }
    if betas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("storage fractions must be strictly increasing"));
    }
    let points = betas
        .par_iter()
        .map(|&beta| {
            let cfg = SimConfig {
                storage: StorageSize::Fraction(beta),
                ..*template
            };
            run_stream(ctx, &cfg).map(|metrics| SweepPoint { beta, metrics })
        })
        .collect::<Result<Vec<_>>>()?;
    let gradient = points
        .windows(2)
        .map(|w| (w[1].metrics.mean_latency - w[0].metrics.mean_latency) / (w[1].beta - w[0].beta))
        .collect();
    let mut result = SweepResult {
        points,
        gradient,
        transition_beta: None,
    };
    result.transition_beta = detect_transition(&result.betas(), &result.latencies(), noise_floor);
    Ok(result)
}

/// The grid point where latency bends most sharply from steep to flat: the interior
/// point with the largest second divided difference.
///
/// Curvature is measured relative to `range(latency) / range(β)²`; a maximum at or below
/// `noise_floor` on that scale, or fewer than five points, yields `None`.
pub fn detect_transition(betas: &[f64], latency: &[f64], noise_floor: f64) -> Option<f64> {
    if betas.len() < 5 || betas.len() != latency.len() {
        return None;
    }
    let span = betas[betas.len() - 1] - betas[0];
    let (lo, hi) = latency
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &l| (lo.min(l), hi.max(l)));
    let scale = (hi - lo) / (span * span);
    if !(scale > 0.0) {
        return None;
    }
    let mut best: Option<(f64, f64)> = None;
    for i in 1..betas.len() - 1 {
        let left = (latency[i] - latency[i - 1]) / (betas[i] - betas[i - 1]);
        let right = (latency[i + 1] - latency[i]) / (betas[i + 1] - betas[i]);
        let d2 = 2.0 * (right - left) / (betas[i + 1] - betas[i - 1]) / scale;
        if best.is_none_or(|(b, _)| d2 > b) {
            best = Some((d2, betas[i]));
        }
    }
    best.filter(|&(d2, _)| d2 > noise_floor).map(|(_, beta)| beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::fixtures::*;
    use crate::kb::AtomId;
    use crate::metrics::ContentMode;
    use approx::assert_abs_diff_eq;

    /// Chain 0 → 1 → 2 → 3 → 4 with queries on atoms 1..=4 (depths 1..=4).
    fn ctx(kind: DistKind) -> SimContext {
        let kb = KnowledgeBase::new(
            5,
            [a(0)],
            [rule(0, &[0], 1), rule(1, &[1], 2), rule(2, &[2], 3), rule(3, &[3], 4)],
        )
        .unwrap();
        let queries = kb.answerable_queries();
        let weights = match kind {
            DistKind::Uniform => vec![1.0; 4],
            DistKind::Zipf { alpha } => (1..=4).map(|r| (r as f64).powf(-alpha)).collect(),
        };
        let dist = QueryDistribution::from_weights(queries, weights, kind).unwrap();
        let model = InfoModel {
            c: 1.0,
            bits_per_atom: 8.0,
            content_mode: ContentMode::Structural,
        };
        SimContext::new(&kb, dist, &model, 2000, 11).unwrap()
    }

    #[test]
    fn full_and_empty_storage() {
        let c = ctx(DistKind::Uniform);
        let oracle = PolicyKind::FreqDepth {
            frequency: FrequencySource::Oracle,
        };
        let full = run_stream(&c, &SimConfig::new(oracle, StorageSize::Fraction(1.0))).unwrap();
        assert_eq!(full.hit_rate, 1.0);
        assert_eq!(full.mean_latency, 1.0);
        assert_eq!(full.total_compute_steps, 0);
        assert!(full.triality.unwrap().satisfied);

        let none = run_stream(&c, &SimConfig::new(PolicyKind::Lru, StorageSize::Fraction(0.0))).unwrap();
        assert_eq!(none.hit_rate, 0.0);
        let measured = &c.stream()[200..];
        let mean_depth = measured.iter().map(|q| c.depth_of(q.query_id) as f64).sum::<f64>() / measured.len() as f64;
        assert_abs_diff_eq!(none.mean_latency, mean_depth, epsilon = 1e-12);
        assert!(none.triality.is_none());
        assert_eq!(none.plan_bits, 0.0);
    }

    #[test]
    fn accounting_identities() {
        let c = ctx(DistKind::Zipf { alpha: 1.2 });
        for policy in ["lru", "lfu", "freqdepth", "truemi", "threshold"] {
            let cfg = SimConfig::new(policy.parse().unwrap(), StorageSize::Capacity(2));
            let m = run_stream(&c, &cfg).unwrap();
            assert_eq!(m.hits + m.misses, 1800, "{policy}");
            assert_eq!(m.accesses, 1800);
            let miss_depth: u64 = m.total_compute_steps;
            assert!(m.mean_latency >= 1.0 && m.mean_latency <= 4.0);
            let expect_energy = landauer_compute_energy(miss_depth, &cfg.thermo)
                + storage_maintenance_energy(m.plan_bits, 1800.0, &cfg.thermo).unwrap();
            assert_abs_diff_eq!(m.energy, expect_energy, epsilon = 1e-30);
            assert_abs_diff_eq!(m.amortized_cost, m.cost.storage_term + m.cost.compute_term, epsilon = 1e-12);
            assert_eq!(run_stream(&c, &cfg).unwrap(), m, "{policy} is deterministic");
        }
    }

    #[test]
    fn oversize_capacity_is_clamped() {
        let c = ctx(DistKind::Uniform);
        let m = run_stream(&c, &SimConfig::new(PolicyKind::Lru, StorageSize::Capacity(100))).unwrap();
        assert_eq!(m.capacity, 4);
    }

    #[test]
    fn two_point_sweep_gradient() {
        let c = ctx(DistKind::Uniform);
        let oracle = PolicyKind::FreqDepth {
            frequency: FrequencySource::Oracle,
        };
        let cfg = SimConfig {
            warmup_fraction: 0.0,
            ..SimConfig::new(oracle, StorageSize::Fraction(0.0))
        };
        let s = sweep_storage(&c, &cfg, &[0.0, 1.0], 1e-6).unwrap();
        let mean_depth = c.stream().iter().map(|q| c.depth_of(q.query_id) as f64).sum::<f64>() / 2000.0;
        assert_eq!(s.gradient.len(), 1);
        assert_abs_diff_eq!(s.gradient[0], 1.0 - mean_depth, epsilon = 1e-12);
        assert!(s.transition_beta.is_none());
        assert!(sweep_storage(&c, &cfg, &[0.5, 0.2], 1e-6).is_err());
    }

    #[test]
    fn transition_on_constructed_curves() {
        let betas: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let linear: Vec<f64> = betas.iter().map(|b| 5.0 - 4.0 * b).collect();
        assert_eq!(detect_transition(&betas, &linear, 1e-6), None);
        // Steep to 0.1, gradual afterwards.
        let knee: Vec<f64> = betas
            .iter()
            .map(|&b| if b <= 0.1 { 5.0 - 30.0 * b } else { 2.0 - (b - 0.1) })
            .collect();
        let t = detect_transition(&betas, &knee, 1e-6).unwrap();
        assert!((t - 0.1).abs() <= 0.05 + 1e-12, "{t}");
        assert_eq!(detect_transition(&betas[..4], &knee[..4], 1e-6), None);
    }

    #[test]
    fn oracle_preload_is_nested() {
        let c = ctx(DistKind::Zipf { alpha: 1.0 });
        let two = c.oracle_freq_depth(2);
        let three = c.oracle_freq_depth(3);
        assert!(two.iter().all(|id| three.contains(id)));
        assert_eq!(c.query_count(), 4);
        assert!(c.dist().queries().iter().any(|q| q.target == AtomId(4)));
    }
}
