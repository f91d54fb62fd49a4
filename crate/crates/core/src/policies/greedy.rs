use std::collections::BinaryHeap;

use super::{Capacity, StoragePlan, StoredItem};
use crate::error::{Error, Result};
use crate::kb::Query;
use crate::metrics::ContentIndex;
use crate::workload::QueryDistribution;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    gain: f64,
    query_id: u32,
    slot: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    /// Larger gain first, then smaller query id.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.query_id.cmp(&self.query_id))
    }
}

/// Greedily stores candidate answers by marginal mutual information under `dist`.
///
/// Marginal gains can only shrink as the plan grows, so stale heap entries are upper
/// bounds and only the top entry needs re-evaluation. Equal gains go to the lower
/// query id. Candidates that no longer fit a bit budget are skipped.
pub fn truemi_select(
    index: &ContentIndex,
    candidates: &[Query],
    dist: &QueryDistribution,
    budget: Capacity,
) -> Result<StoragePlan> {
    let mut plan = StoragePlan::new(budget);
    if candidates.is_empty() {
        return Ok(plan);
    }
    let mut weight = vec![0.0; index.profiles().len()];
    for (q, f) in dist.iter() {
        let slot = index.slot(q.query_id).ok_or(Error::Unanswerable { query: q.query_id })?;
        weight[slot] = f;
    }

    let gain = |plan: &StoragePlan, slot: usize| -> f64 {
        let p = &index.profiles()[slot];
        let target = p.query.target;
        let mut g = weight[slot] * index.residual_at(slot, plan);
        if !plan.covers_atom(target) {
            let atom_nats = index.atom_bits(target) * std::f64::consts::LN_2;
            for &other in index.profiles_containing(target) {
                if other != slot && !plan.has_answer(index.profiles()[other].query.target) {
                    g += weight[other] * atom_nats;
                }
            }
        }
        g
    };

    let mut heap = BinaryHeap::with_capacity(candidates.len());
    for q in candidates {
        let slot = index.slot(q.query_id).ok_or(Error::Unanswerable { query: q.query_id })?;
        heap.push(Candidate {
            gain: gain(&plan, slot),
            query_id: q.query_id,
            slot,
        });
    }

    while let Some(top) = heap.pop() {
        let item = StoredItem::Answer(index.profiles()[top.slot].query.target);
        if plan.contains(item) {
            continue;
        }
        let bits = index.item_bits(item)?;
        if !plan.fits(item, bits) {
            if matches!(budget, Capacity::Entries(_)) {
                break;
            }
            continue;
        }
        let fresh = Candidate {
            gain: gain(&plan, top.slot),
            ..top
        };
        if heap.peek().is_some_and(|next| fresh < *next) {
            heap.push(fresh);
            continue;
        }
        plan.insert(item, bits)?;
    }
    Ok(plan)
}
