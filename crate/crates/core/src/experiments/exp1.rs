//! Single-query duality check under pure storage.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{Cell, ExperimentReport};
use super::{derive_seed, ExperimentConfig};
use crate::error::{Error, Result};
use crate::kb::{generate_kb, KbGenParams, Query};
use crate::metrics::{derivation_bounds_check, information_richness, ContentIndex};
use crate::thermo::amortized_access_cost;
use crate::workload::{build_distribution, WorkloadSpec};

pub const COLUMNS: [&str; 15] = [
    "seed",
    "kb_size",
    "entities",
    "rules",
    "base_facts",
    "queries_tested",
    "satisfaction_rate",
    "avg_margin",
    "min_margin",
    "max_margin",
    "mean_depth",
    "mean_h_q_nats",
    "mean_f_q",
    "thm3_satisfaction_rate",
    "mean_richness",
];

const SIZE_LABELS: [&str; 3] = ["small", "medium", "large"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityMargin {
    /// `H_q / f_q`, nats.
    pub cost: f64,
    /// `H_q (1 + 1/(c ln m) − 1/f_q) − c log₂ m`.
    pub bound: f64,
    pub margin: f64,
}

impl DualityMargin {
    pub fn satisfied(&self) -> bool {
        self.margin >= 0.0
    }
}

/// Pure-storage cost of one query against its duality lower bound.
pub fn duality_margin(h_q: f64, f_q: f64, m: usize, c: f64) -> Result<DualityMargin> {
    if m < 2 || !(c > 0.0) {
        return Err(Error::invalid("duality bound needs m >= 2 and c > 0"));
    }
    let m = m as f64;
    let cost = amortized_access_cost(h_q, f_q, 0.0)?;
    let bound = h_q * (1.0 + 1.0 / (c * m.ln()) - 1.0 / f_q) - c * m.log2();
    Ok(DualityMargin {
        cost,
        bound,
        margin: cost - bound,
    })
}

struct KbSummary {
    entities: usize,
    rules: usize,
    base_facts: usize,
    tested: usize,
    satisfied: usize,
    margins: Vec<f64>,
    mean_depth: f64,
    mean_h: f64,
    mean_f: f64,
    thm3_satisfied: usize,
    mean_richness: f64,
}

fn run_kb(cfg: &ExperimentConfig, atoms: usize, i: usize) -> Result<KbSummary> {
    let e = &cfg.exp1;
    let kb_seed = derive_seed(cfg.seed, 1, i as u64);
    let kb = generate_kb(&KbGenParams::new(
        atoms,
        (atoms as f64 * e.rules_per_atom).round() as usize,
        e.target_mean_depth,
        e.max_arity,
        kb_seed,
    ))?;
    let all = kb.answerable_queries();
    let dist = build_distribution(&WorkloadSpec::zipf(e.alpha, all.len(), 1, 0), &all)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 11, i as u64));
    let mut picked: Vec<usize> = index::sample(&mut rng, all.len(), e.queries_per_kb.min(all.len())).into_vec();
    picked.sort_unstable();
    let sampled: Vec<Query> = picked.iter().map(|&j| all[j]).collect();

    let model = cfg.info.model(atoms);
    let content = ContentIndex::build(&kb, &sampled, &model)?;
    let base = kb.base_facts().len() as u64;
    let mut s = KbSummary {
        entities: atoms,
        rules: kb.rules().len(),
        base_facts: base as usize,
        tested: sampled.len(),
        satisfied: 0,
        margins: Vec::with_capacity(sampled.len()),
        mean_depth: 0.0,
        mean_h: 0.0,
        mean_f: 0.0,
        thm3_satisfied: 0,
        mean_richness: 0.0,
    };
    for p in content.profiles() {
        let f_q = dist.probability(p.query.query_id);
        let d = duality_margin(p.h_q, f_q, atoms, model.c)?;
        s.satisfied += d.satisfied() as usize;
        s.margins.push(d.margin);
        s.thm3_satisfied += derivation_bounds_check(p.h_q, p.depth, base, &model)?.satisfied as usize;
        s.mean_depth += p.depth as f64;
        s.mean_h += p.h_q;
        s.mean_f += f_q;
        s.mean_richness += information_richness(p.h_q, atoms);
    }
    let n = s.tested.max(1) as f64;
    s.mean_depth /= n;
    s.mean_h /= n;
    s.mean_f /= n;
    s.mean_richness /= n;
    Ok(s)
}

/// One row per knowledge base size, mirroring the duality validation table.
pub fn exp1_duality(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let sizes = &cfg.exp1.atom_counts;
    let summaries = sizes
        .par_iter()
        .enumerate()
        .map(|(i, &atoms)| run_kb(cfg, atoms, i))
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::new("exp1", cfg.seed, cfg.to_json()?, &COLUMNS);
    let mut all_satisfied = true;
    let mut avg_margins = Vec::new();
    for (i, s) in summaries.iter().enumerate() {
        let n = s.tested.max(1) as f64;
        let avg = s.margins.iter().sum::<f64>() / n;
        let min = s.margins.iter().copied().fold(f64::INFINITY, f64::min);
        let max = s.margins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        all_satisfied &= s.satisfied == s.tested;
        avg_margins.push(avg);
        let label = SIZE_LABELS.get(i).map_or_else(|| format!("kb{i}"), |l| l.to_string());
        report.push(vec![
            Cell::from(cfg.seed),
            label.into(),
            s.entities.into(),
            s.rules.into(),
            s.base_facts.into(),
            s.tested.into(),
            (s.satisfied as f64 / n).into(),
            avg.into(),
            min.into(),
            max.into(),
            s.mean_depth.into(),
            s.mean_h.into(),
            s.mean_f.into(),
            (s.thm3_satisfied as f64 / n).into(),
            s.mean_richness.into(),
        ])?;
    }
    report.set_meta("all_satisfied", all_satisfied)?;
    report.set_meta(
        "margins_increasing",
        avg_margins.windows(2).all(|w| w[1] > w[0]) && avg_margins.iter().all(|&m| m > 0.0),
    )?;
    Ok(report)
}
