//! Policy comparison across cache sizes and seeds.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::json;

use super::report::{Cell, ExperimentReport};
use super::{derive_seed, ExperimentConfig};
use crate::error::Result;
use crate::kb::generate_kb;
use crate::policies::PolicyKind;
use crate::simulator::{run_stream, SimConfig, SimContext, SimMetrics, StorageSize};
use crate::workload::{build_distribution, WorkloadSpec};

pub const COLUMNS: [&str; 12] = [
    "seed",
    "run",
    "run_seed",
    "policy",
    "params",
    "cache_size",
    "hit_rate",
    "latency",
    "total_compute",
    "energy",
    "storage_bits",
    "mean_depth",
];

/// Per-run summary at the highlighted cache size.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Highlight {
    /// Mean over runs, keyed by policy name.
    pub hit_rate: BTreeMap<String, f64>,
    pub latency: BTreeMap<String, f64>,
    /// Runs in which `freqdepth > lfu ≥ lru > truemi` by hit rate.
    pub ordering_runs: usize,
    pub runs: usize,
    /// `(L_lru − L_freqdepth) / L_lru` on mean latencies.
    pub latency_improvement: Option<f64>,
}

/// `freqdepth > lfu ≥ lru > truemi`, or `None` when a policy is missing.
pub fn ordering_holds(hit: &BTreeMap<String, f64>) -> Option<bool> {
    let g = |k: &str| hit.get(k).copied();
    let (fd, lfu, lru, mi) = (g("freqdepth")?, g("lfu")?, g("lru")?, g("truemi")?);
    Some(fd > lfu && lfu >= lru && lru > mi)
}

fn context(cfg: &ExperimentConfig, run: usize) -> Result<(u64, SimContext)> {
    let e = &cfg.exp3;
    let run_seed = derive_seed(cfg.seed, 3, run as u64);
    let kb = generate_kb(&e.kb.params(run_seed))?;
    let queries = kb.sample_queries(e.query_count, derive_seed(run_seed, 31, 0));
    let dist = build_distribution(&WorkloadSpec::zipf(e.alpha, queries.len(), e.stream_length, 0), &queries)?;
    let model = cfg.info.model(kb.atom_count());
    let ctx = SimContext::new(&kb, dist, &model, e.stream_length, derive_seed(run_seed, 32, 0))?;
    Ok((run_seed, ctx))
}

pub fn exp3_baselines(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let e = &cfg.exp3;
    let contexts = (0..e.seeds)
        .into_par_iter()
        .map(|run| context(cfg, run))
        .collect::<Result<Vec<_>>>()?;

    let tasks: Vec<(usize, usize, PolicyKind)> = (0..e.seeds)
        .flat_map(|run| {
            e.cache_sizes
                .iter()
                .flat_map(move |&size| e.policies.iter().map(move |&p| (run, size, p)))
        })
        .collect();
    let results = tasks
        .par_iter()
        .map(|&(run, size, policy)| {
            let sim = SimConfig {
                warmup_fraction: e.warmup_fraction,
                thermo: cfg.thermo,
                ..SimConfig::new(policy, StorageSize::Capacity(size))
            };
            run_stream(&contexts[run].1, &sim)
        })
        .collect::<Result<Vec<SimMetrics>>>()?;

    let mut report = ExperimentReport::new("exp3", cfg.seed, cfg.to_json()?, &COLUMNS);
    let mut per_run: Vec<BTreeMap<String, (f64, f64)>> = vec![BTreeMap::new(); e.seeds];
    for (&(run, size, policy), m) in tasks.iter().zip(&results) {
        let (run_seed, ctx) = &contexts[run];
        if size == e.highlight_size {
            per_run[run].insert(policy.name().to_string(), (m.hit_rate, m.mean_latency));
        }
        report.push(vec![
            Cell::from(cfg.seed),
            run.into(),
            // Stored as text: JSON numbers lose precision above 2^53.
            run_seed.to_string().into(),
            policy.name().into(),
            serde_json::to_string(&policy)?.into(),
            size.into(),
            m.hit_rate.into(),
            m.mean_latency.into(),
            m.total_compute_steps.into(),
            m.energy.into(),
            m.plan_bits.into(),
            ctx.mean_depth().into(),
        ])?;
    }

    let h = highlight(&per_run);
    report.set_meta(
        "highlight",
        json!({
            "cache_size": e.highlight_size,
            "hit_rate": h.hit_rate,
            "latency": h.latency,
            "ordering_runs": h.ordering_runs,
            "runs": h.runs,
            "latency_improvement": h.latency_improvement,
        }),
    )?;
    Ok(report)
}

fn highlight(per_run: &[BTreeMap<String, (f64, f64)>]) -> Highlight {
    let mut out = Highlight {
        runs: per_run.len(),
        ..Highlight::default()
    };
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for run in per_run {
        let hits: BTreeMap<String, f64> = run.iter().map(|(k, v)| (k.clone(), v.0)).collect();
        out.ordering_runs += ordering_holds(&hits).unwrap_or(false) as usize;
        for (k, &(hr, lat)) in run {
            *out.hit_rate.entry(k.clone()).or_default() += hr;
            *out.latency.entry(k.clone()).or_default() += lat;
            *counts.entry(k.clone()).or_default() += 1;
        }
    }
    for (k, n) in &counts {
        *out.hit_rate.get_mut(k).unwrap() /= *n as f64;
        *out.latency.get_mut(k).unwrap() /= *n as f64;
    }
    if let (Some(&lru), Some(&fd)) = (out.latency.get("lru"), out.latency.get("freqdepth")) {
        out.latency_improvement = Some((lru - fd) / lru);
    }
    out
}

/// Recomputes the highlight summary from a finished report.
pub fn highlight_from_report(report: &ExperimentReport, cache_size: usize) -> Highlight {
    let (Some(run_i), Some(pol_i), Some(size_i), Some(hr_i), Some(lat_i)) = (
        report.column("run"),
        report.column("policy"),
        report.column("cache_size"),
        report.column("hit_rate"),
        report.column("latency"),
    ) else {
        return Highlight::default();
    };
    let mut per_run: BTreeMap<i64, BTreeMap<String, (f64, f64)>> = BTreeMap::new();
    for row in &report.rows {
        if row[size_i].as_f64() != Some(cache_size as f64) {
            continue;
        }
        let (Cell::Int(run), Some(p), Some(hr), Some(lat)) =
            (&row[run_i], row[pol_i].as_str(), row[hr_i].as_f64(), row[lat_i].as_f64())
        else {
            continue;
        };
        per_run.entry(*run).or_default().insert(p.to_string(), (hr, lat));
    }
    highlight(&per_run.into_values().collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::KbSpec;

    fn hits(v: [f64; 4]) -> BTreeMap<String, f64> {
        ["freqdepth", "lfu", "lru", "truemi"]
            .iter()
            .zip(v)
            .map(|(k, x)| (k.to_string(), x))
            .collect()
    }

    #[test]
    fn ordering_predicate() {
        assert_eq!(ordering_holds(&hits([0.9, 0.8, 0.8, 0.5])), Some(true));
        assert_eq!(ordering_holds(&hits([0.8, 0.8, 0.7, 0.5])), Some(false));
        assert_eq!(ordering_holds(&hits([0.9, 0.8, 0.85, 0.5])), Some(false));
        assert_eq!(ordering_holds(&BTreeMap::new()), None);
    }

    #[test]
    fn small_run_and_highlight_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.exp3.kb = KbSpec {
            atom_count: 300,
            ..KbSpec::default()
        };
        cfg.exp3.query_count = 100;
        cfg.exp3.stream_length = 3000;
        cfg.exp3.cache_sizes = vec![5, 10];
        cfg.exp3.highlight_size = 5;
        cfg.exp3.seeds = 2;
        let r = exp3_baselines(&cfg).unwrap();
        assert_eq!(r.rows.len(), 2 * 2 * 4);
        let h = highlight_from_report(&r, 5);
        assert_eq!(h.runs, 2);
        assert_eq!(h.hit_rate.len(), 4);
        let meta = &r.metadata["highlight"];
        assert_eq!(meta["ordering_runs"], json!(h.ordering_runs));
        assert_eq!(meta["hit_rate"]["lru"], json!(h.hit_rate["lru"]));
    }
}
