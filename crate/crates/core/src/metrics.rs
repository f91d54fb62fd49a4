//! Information measures over a knowledge base and a query workload.
//!
//! Semantic content is a computable stand-in for conditional Kolmogorov complexity: a query
//! carries the encoding width of every atom concluded on its minimal proof. Storage covers
//! atoms, so the information a plan captures is a weighted coverage function of the plan.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::{AtomId, DepthMap, KnowledgeBase, Query};
use crate::num::{nats_to_bits, splitmix64, unit_interval, InfoUnit, Scalar};
use crate::policies::{StoragePlan, StoredItem};
use crate::workload::QueryDistribution;

/// How the per-atom encoding width is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum ContentMode {
    /// Every atom costs `bits_per_atom`.
    Structural,
    /// Each atom gets an integer width drawn uniformly from `min_bits..=max_bits`,
    /// reproducible from `seed`.
    Synthetic { min_bits: u32, max_bits: u32, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoModel {
    pub c: f64,
    pub bits_per_atom: f64,
    pub content_mode: ContentMode,
}

impl InfoModel {
    /// `c = 1` and `⌈log₂ atom_count⌉` bits per atom (at least one).
    pub fn for_atom_count(atom_count: usize) -> Self {
        let width = (atom_count.max(2) as f64).log2().ceil();
        InfoModel {
            c: 1.0,
            bits_per_atom: width.max(1.0),
            content_mode: ContentMode::Structural,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::invalid(format!("c must be positive, got {}", self.c)));
        }
        if !(self.bits_per_atom.is_finite() && self.bits_per_atom >= 1.0) {
            return Err(Error::invalid(format!(
                "bits_per_atom must be >= 1, got {}",
                self.bits_per_atom
            )));
        }
        if let ContentMode::Synthetic { min_bits, max_bits, .. } = self.content_mode {
            if min_bits == 0 || min_bits > max_bits {
                return Err(Error::invalid(format!("synthetic widths {min_bits}..={max_bits}")));
            }
        }
        Ok(())
    }

    /// Encoding width of `atom` in bits.
    pub fn atom_bits(&self, atom: AtomId) -> f64 {
        match self.content_mode {
            ContentMode::Structural => self.bits_per_atom,
            ContentMode::Synthetic { min_bits, max_bits, seed } => {
                let span = f64::from(max_bits - min_bits + 1);
                let u = unit_interval(splitmix64(seed ^ splitmix64(u64::from(atom.0))));
                f64::from(min_bits) + (u * span).floor().min(span - 1.0)
            }
        }
    }
}

/// `−Σ pᵢ log pᵢ` over a probability vector, in `unit`. Zero entries contribute nothing.
pub fn entropy_of<S: Scalar>(probs: &[S], unit: InfoUnit) -> Result<S> {
    if probs.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let nats = probs
        .iter()
        .filter(|p| **p > S::zero())
        .fold(S::zero(), |acc, &p| acc - p * p.ln());
    Ok(match unit {
        InfoUnit::Nats => nats,
        InfoUnit::Bits => nats_to_bits(nats),
    })
}

pub fn shannon_entropy(dist: &QueryDistribution, unit: InfoUnit) -> Result<f64> {
    entropy_of(dist.weights(), unit)
}

/// `depth · ln 2` nats.
pub fn derivation_entropy<S: Scalar>(depth: u64) -> S {
    S::from_count(depth) * S::LN_2()
}

/// Ratio of a query's content in bits to `log₂ |atoms|`. Values well above one place the
/// query in the information-rich regime.
pub fn information_richness(h_q_nats: f64, atom_count: usize) -> f64 {
    nats_to_bits(h_q_nats) / (atom_count.max(2) as f64).log2()
}

/// Per-query content profile: the minimal proof and the atoms it concludes.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryProfile {
    pub query: Query,
    pub depth: u64,
    pub trace_atoms: Vec<AtomId>,
    /// `H_q` in nats.
    pub h_q: f64,
}

/// Content profiles of a fixed query set, plus the reverse index from atoms to the
/// profiles whose proofs conclude them.
#[derive(Debug, Clone)]
pub struct ContentIndex {
    model: InfoModel,
    atom_count: usize,
    atom_bits: Vec<f64>,
    profiles: Vec<QueryProfile>,
    by_query: BTreeMap<u32, usize>,
    by_target: BTreeMap<AtomId, usize>,
    containing: BTreeMap<AtomId, Vec<usize>>,
}

impl ContentIndex {
    pub fn build(kb: &KnowledgeBase, queries: &[Query], model: &InfoModel) -> Result<Self> {
        model.validate()?;
        let depths = DepthMap::compute(kb, kb.base_facts())?;
        Self::with_depths(kb, &depths, queries, model)
    }

    /// Same as [`Self::build`] with a precomputed depth map from the base facts.
    pub fn with_depths(
        kb: &KnowledgeBase,
        depths: &DepthMap,
        queries: &[Query],
        model: &InfoModel,
    ) -> Result<Self> {
        model.validate()?;
        let atom_bits: Vec<f64> = (0..kb.atom_count() as u32).map(|i| model.atom_bits(AtomId(i))).collect();
        let mut index = ContentIndex {
            model: *model,
            atom_count: kb.atom_count(),
            atom_bits,
            profiles: Vec::with_capacity(queries.len()),
            by_query: BTreeMap::new(),
            by_target: BTreeMap::new(),
            containing: BTreeMap::new(),
        };
        for &query in queries {
            kb.check_atoms([&query.target])?;
            let depth = depths.depth(query.target).ok_or(Error::Unanswerable {
                query: query.query_id,
            })?;
            let trace_atoms = depths.trace_atoms(kb, query.target);
            let bits: f64 = trace_atoms.iter().map(|a| index.atom_bits[a.index()]).sum();
            let slot = index.profiles.len();
            if index.by_query.insert(query.query_id, slot).is_some() {
                return Err(Error::invalid(format!("duplicate query id {}", query.query_id)));
            }
            index.by_target.entry(query.target).or_insert(slot);
            for &a in &trace_atoms {
                index.containing.entry(a).or_default().push(slot);
            }
            index.profiles.push(QueryProfile {
                query,
                depth,
                trace_atoms,
                h_q: bits * std::f64::consts::LN_2,
            });
        }
        Ok(index)
    }

    pub fn model(&self) -> &InfoModel {
        &self.model
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn profiles(&self) -> &[QueryProfile] {
        &self.profiles
    }

    /// Position of `query_id` in [`Self::profiles`].
    pub fn slot(&self, query_id: u32) -> Option<usize> {
        self.by_query.get(&query_id).copied()
    }

    pub fn profile(&self, query_id: u32) -> Option<&QueryProfile> {
        self.by_query.get(&query_id).map(|&i| &self.profiles[i])
    }

    pub fn profile_for_target(&self, target: AtomId) -> Option<&QueryProfile> {
        self.by_target.get(&target).map(|&i| &self.profiles[i])
    }

    /// Slots of the profiles whose proofs conclude `atom`.
    pub fn profiles_containing(&self, atom: AtomId) -> &[usize] {
        self.containing.get(&atom).map_or(&[], Vec::as_slice)
    }

    pub fn atom_bits(&self, atom: AtomId) -> f64 {
        self.atom_bits[atom.index()]
    }

    /// Storage size of `item` in bits. An answer costs its query's full content.
    pub fn item_bits(&self, item: StoredItem) -> Result<f64> {
        match item {
            StoredItem::Atom(a) => {
                if a.index() >= self.atom_count {
                    return Err(Error::AtomOutOfRange {
                        atom: a.0,
                        atom_count: self.atom_count,
                    });
                }
                Ok(self.atom_bits(a))
            }
            StoredItem::Answer(a) => self
                .profile_for_target(a)
                .map(|p| nats_to_bits(p.h_q))
                .ok_or_else(|| Error::invalid(format!("no indexed query targets atom {a}"))),
        }
    }

    /// `H(q | S)` in nats for the profile in `slot`.
    pub fn residual_at(&self, slot: usize, plan: &StoragePlan) -> f64 {
        let p = &self.profiles[slot];
        if plan.has_answer(p.query.target) {
            return 0.0;
        }
        let bits: f64 = p
            .trace_atoms
            .iter()
            .filter(|&&a| !plan.covers_atom(a))
            .map(|&a| self.atom_bits(a))
            .sum();
        bits * std::f64::consts::LN_2
    }

    /// `Σ_q f_q (H_q − H(q|S))` in nats. Every query of `dist` must be indexed.
    pub fn mutual_info(&self, plan: &StoragePlan, dist: &QueryDistribution) -> Result<f64> {
        dist.iter().try_fold(0.0, |acc, (q, f)| {
            let slot = *self.by_query.get(&q.query_id).ok_or(Error::Unanswerable { query: q.query_id })?;
            Ok(acc + f * (self.profiles[slot].h_q - self.residual_at(slot, plan)))
        })
    }

    /// `I(S;Q) / |S|`, both in bits.
    pub fn efficiency(&self, plan: &StoragePlan, dist: &QueryDistribution) -> Result<f64> {
        if plan.is_empty() || plan.total_bits() <= 0.0 {
            return Err(Error::invalid("storage efficiency of an empty plan"));
        }
        let eta = nats_to_bits(self.mutual_info(plan, dist)?) / plan.total_bits();
        if eta > 1.0 + 1e-9 {
            return Err(Error::ModelViolation(format!(
                "efficiency {eta} exceeds 1 for a plan of {} bits",
                plan.total_bits()
            )));
        }
        Ok(eta)
    }
}

/// `H_q` in nats.
pub fn semantic_content(kb: &KnowledgeBase, q: Query, model: &InfoModel) -> Result<f64> {
    Ok(ContentIndex::build(kb, &[q], model)?.profiles[0].h_q)
}

/// `H(q | S)` in nats.
pub fn residual_content(kb: &KnowledgeBase, q: Query, plan: &StoragePlan, model: &InfoModel) -> Result<f64> {
    Ok(ContentIndex::build(kb, &[q], model)?.residual_at(0, plan))
}

/// `I(S;Q)` in nats.
pub fn mutual_info(
    kb: &KnowledgeBase,
    plan: &StoragePlan,
    dist: &QueryDistribution,
    model: &InfoModel,
) -> Result<f64> {
    ContentIndex::build(kb, dist.queries(), model)?.mutual_info(plan, dist)
}

pub fn storage_efficiency(
    kb: &KnowledgeBase,
    plan: &StoragePlan,
    dist: &QueryDistribution,
    model: &InfoModel,
) -> Result<f64> {
    ContentIndex::build(kb, dist.queries(), model)?.efficiency(plan, dist)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck<S> {
    /// Lower bound on the derivation entropy, nats.
    pub lower: S,
    /// Upper bound on the derivation entropy, nats.
    pub upper: S,
    /// `depth · ln 2`, nats.
    pub h_derive: S,
    pub satisfied: bool,
}

/// Checks `lower ≤ depth · ln 2 ≤ upper` with
/// `lower = h_q / (c log₂(m+n)) − c log₂ m` and `upper = h_q c log₂(m+n) / ln 2 + c log₂ m`.
pub fn derivation_bounds<S: Scalar>(h_q: S, depth: u64, m: u64, c: S) -> Result<BoundCheck<S>> {
    if m < 1 {
        return Err(Error::invalid("m must be >= 1"));
    }
    if m + depth < 2 {
        return Err(Error::invalid("m + depth must be >= 2"));
    }
    let log_mn = S::from_count(m + depth).log2();
    let slack = c * S::from_count(m).log2();
    let lower = h_q / (c * log_mn) - slack;
    let upper = h_q * c * log_mn / S::LN_2() + slack;
    let h_derive = derivation_entropy::<S>(depth);
    Ok(BoundCheck {
        lower,
        upper,
        h_derive,
        satisfied: lower <= h_derive && h_derive <= upper,
    })
}

pub fn derivation_bounds_check(h_q: f64, depth: u64, m: u64, model: &InfoModel) -> Result<BoundCheck<f64>> {
    derivation_bounds(h_q, depth, m, model.c)
}
