use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Capacity, StoragePlan, StoredItem};
use crate::error::Result;
use crate::metrics::ContentIndex;
use crate::thermo::critical_frequency;
use crate::workload::QueryDistribution;

/// `τ = tau_scale · ln atom_count`.
pub fn threshold_tau(atom_count: usize, tau_scale: f64) -> f64 {
    tau_scale * (atom_count.max(2) as f64).ln()
}

/// Store iff `f_q · depth / h_q > τ`.
pub fn threshold_decide(f_q: f64, depth: u64, h_q: f64, atom_count: usize, tau_scale: f64) -> bool {
    if !(h_q > 0.0) {
        return false;
    }
    f_q * depth as f64 / h_q > threshold_tau(atom_count, tau_scale)
}

/// Answers that pass the threshold rule, highest score first until `capacity` is full.
///
/// `accesses` converts probabilities into expected access counts, which is the frequency
/// the rule compares against a logarithmic threshold.
pub fn threshold_plan(
    index: &ContentIndex,
    dist: &QueryDistribution,
    accesses: f64,
    tau_scale: f64,
    capacity: Capacity,
) -> Result<StoragePlan> {
    let mut scored: Vec<(f64, u32, usize)> = Vec::new();
    for (q, f) in dist.iter() {
        let Some(slot) = index.slot(q.query_id) else { continue };
        let p = &index.profiles()[slot];
        let f_q = f * accesses;
        if threshold_decide(f_q, p.depth, p.h_q, index.atom_count(), tau_scale) {
            scored.push((f_q * p.depth as f64 / p.h_q, q.query_id, slot));
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut plan = StoragePlan::new(capacity);
    for (_, _, slot) in scored {
        let item = StoredItem::Answer(index.profiles()[slot].query.target);
        let bits = index.item_bits(item)?;
        if plan.fits(item, bits) {
            plan.insert(item, bits)?;
        }
    }
    Ok(plan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stratum {
    High,
    Medium,
    Low,
}

/// Splits queries around the critical frequency with margin `ε = eps_scale / ln² atom_count`.
///
/// Frequencies are expected access counts: each probability is multiplied by `accesses`.
pub fn stratify_queries(
    dist: &QueryDistribution,
    atom_count: usize,
    c: f64,
    eps_scale: f64,
    accesses: f64,
) -> Result<BTreeMap<u32, Stratum>> {
    let f_c = critical_frequency(atom_count as f64, c)?;
    let eps = eps_scale / (atom_count as f64).ln().powi(2);
    Ok(dist
        .iter()
        .map(|(q, f)| {
            let f_q = f * accesses;
            let s = if f_q > f_c + eps {
                Stratum::High
            } else if f_q < f_c - eps {
                Stratum::Low
            } else {
                Stratum::Medium
            };
            (q.query_id, s)
        })
        .collect())
}
