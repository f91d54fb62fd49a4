//! Logical depth: the minimal number of rule applications in a proof tree.
//!
//! Costs satisfy `cost(a) = 0` for `a ∈ start` and
//! `cost(c) = min over rules p₁…pₖ → c of 1 + Σ cost(pᵢ)`. The least solution is found with
//! Knuth's generalisation of Dijkstra's algorithm to superior functions on the rule
//! hypergraph: an atom is finalised when popped, and a rule is relaxed once all of its
//! premises are final. Equal costs resolve to the lowest rule id.
//!
//! Shared sub-derivations are counted once per use, so the depth is a tree cost and an upper
//! bound on the size of the smallest derivation DAG.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{AtomId, AtomSet, KnowledgeBase, RuleId};
use crate::error::Result;

const NO_RULE: u32 = u32::MAX;

/// Depth and proof trace for one target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationResult {
    /// `None` when the target is not derivable.
    pub depth: Option<u64>,
    /// Rule applications in post-order (premises before conclusions). Has exactly `depth`
    /// entries; shared sub-proofs repeat.
    pub trace: Vec<RuleId>,
}

impl DerivationResult {
    pub fn derivable(&self) -> bool {
        self.depth.is_some()
    }
}

/// Minimal tree costs from one start set to every atom.
#[derive(Debug, Clone)]
pub struct DepthMap {
    cost: Vec<u64>,
    via: Vec<u32>,
}

impl DepthMap {
    pub fn compute(kb: &KnowledgeBase, start: &AtomSet) -> Result<Self> {
        kb.check_atoms(start)?;
        Ok(search(kb, &kb.mask_of(start), None))
    }

    pub(crate) fn from_mask(kb: &KnowledgeBase, start: &[bool]) -> Self {
        search(kb, start, None)
    }

    pub fn depth(&self, atom: AtomId) -> Option<u64> {
        match self.cost.get(atom.index()) {
            Some(&c) if c != u64::MAX => Some(c),
            _ => None,
        }
    }

    /// The rule chosen to derive `atom`, or `None` for start atoms and underivable ones.
    pub fn via(&self, atom: AtomId) -> Option<usize> {
        match self.via.get(atom.index()) {
            Some(&r) if r != NO_RULE => Some(r as usize),
            _ => None,
        }
    }

    pub fn derivation(&self, kb: &KnowledgeBase, target: AtomId) -> DerivationResult {
        match self.depth(target) {
            None => DerivationResult {
                depth: None,
                trace: Vec::new(),
            },
            Some(depth) => DerivationResult {
                depth: Some(depth),
                trace: self.trace(kb, target),
            },
        }
    }

    /// Post-order rule sequence of the minimal proof tree of `target`.
    pub fn trace(&self, kb: &KnowledgeBase, target: AtomId) -> Vec<RuleId> {
        let mut out = Vec::new();
        if self.depth(target).is_none() {
            return out;
        }
        // (atom, expanded?)
        let mut stack = vec![(target, false)];
        while let Some((atom, expanded)) = stack.pop() {
            let Some(ri) = self.via(atom) else { continue };
            let rule = &kb.rules()[ri];
            if expanded {
                out.push(rule.id());
            } else {
                stack.push((atom, true));
                for &p in rule.premises().iter().rev() {
                    stack.push((p, false));
                }
            }
        }
        out
    }

    /// Distinct atoms concluded anywhere in the minimal proof of `target`, ascending.
    /// A target that is already in the start set yields `{target}`.
    pub fn trace_atoms(&self, kb: &KnowledgeBase, target: AtomId) -> Vec<AtomId> {
        if self.depth(target).is_none() {
            return Vec::new();
        }
        if self.via(target).is_none() {
            return vec![target];
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut stack = vec![target];
        while let Some(atom) = stack.pop() {
            let Some(ri) = self.via(atom) else { continue };
            if !seen.insert(atom) {
                continue;
            }
            stack.extend_from_slice(kb.rules()[ri].premises());
        }
        seen.into_iter().collect()
    }
}

/// Minimal derivation of `target` from `start`.
pub fn logical_depth(kb: &KnowledgeBase, target: AtomId, start: &AtomSet) -> Result<DerivationResult> {
    kb.check_atoms(start.iter().chain(std::iter::once(&target)))?;
    let map = search(kb, &kb.mask_of(start), Some(target));
    Ok(map.derivation(kb, target))
}

fn search(kb: &KnowledgeBase, start: &[bool], stop_at: Option<AtomId>) -> DepthMap {
    let n = kb.atom_count();
    let rules = kb.rules();
    let mut cost = vec![u64::MAX; n];
    let mut via = vec![NO_RULE; n];
    let mut done = vec![false; n];
    let mut missing: Vec<u32> = rules.iter().map(|r| r.arity() as u32).collect();
    let mut heap = BinaryHeap::new();
    for (i, &s) in start.iter().enumerate() {
        if s {
            cost[i] = 0;
            heap.push(Reverse((0u64, NO_RULE, i as u32)));
        }
    }
    while let Some(Reverse((c, r, atom))) = heap.pop() {
        let ai = atom as usize;
        if done[ai] || c != cost[ai] || r != via[ai] {
            continue;
        }
        done[ai] = true;
        if stop_at == Some(AtomId(atom)) {
            break;
        }
        for &ri in kb.watchers(AtomId(atom)) {
            let rii = ri as usize;
            missing[rii] -= 1;
            if missing[rii] != 0 {
                continue;
            }
            let rule = &rules[rii];
            let head = rule.conclusion().index();
            if done[head] {
                continue;
            }
            let candidate = rule
                .premises()
                .iter()
                .fold(1u64, |acc, p| acc.saturating_add(cost[p.index()]));
            if (candidate, ri) < (cost[head], via[head]) {
                cost[head] = candidate;
                via[head] = ri;
                heap.push(Reverse((candidate, ri, head as u32)));
            }
        }
    }
    DepthMap { cost, via }
}
