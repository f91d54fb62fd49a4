//! Propositional Horn knowledge bases.
//!
//! Atoms are dense integer ids. Rules have a non-empty premise set and a single conclusion.
//! The submodules provide forward chaining ([`chain`]), minimal-derivation depth ([`depth`]),
//! atomic decomposition ([`decompose`]), a layered synthetic generator ([`generate`]) and a
//! line-oriented text format ([`text`]).

pub mod chain;
pub mod decompose;
pub mod depth;
pub mod generate;
pub mod text;

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chain::{forward_closure, is_derivable};
pub use decompose::atomic_decomposition;
pub use depth::{logical_depth, DepthMap, DerivationResult};
pub use generate::{generate_kb, KbGenParams};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct AtomId(pub u32);

impl AtomId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct RuleId(pub u32);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type AtomSet = BTreeSet<AtomId>;

/// `p1 ∧ … ∧ pk → c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HornRule {
    id: RuleId,
    premises: Vec<AtomId>,
    conclusion: AtomId,
}

impl HornRule {
    /// Premises are sorted and deduplicated.
    pub fn new(id: RuleId, premises: impl IntoIterator<Item = AtomId>, conclusion: AtomId) -> Result<Self> {
        let mut premises: Vec<AtomId> = premises.into_iter().collect();
        premises.sort_unstable();
        premises.dedup();
        if premises.is_empty() {
            return Err(Error::InvalidRule {
                rule: id.0,
                reason: "empty premise set".into(),
            });
        }
        if premises.binary_search(&conclusion).is_ok() {
            return Err(Error::InvalidRule {
                rule: id.0,
                reason: format!("conclusion {conclusion} is also a premise"),
            });
        }
        Ok(HornRule {
            id,
            premises,
            conclusion,
        })
    }

    pub fn id(&self) -> RuleId {
        self.id
    }

    pub fn premises(&self) -> &[AtomId] {
        &self.premises
    }

    pub fn conclusion(&self) -> AtomId {
        self.conclusion
    }

    pub fn arity(&self) -> usize {
        self.premises.len()
    }
}

/// An answerable query: derive `target` from the base facts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Query {
    pub query_id: u32,
    pub target: AtomId,
}

/// Atom universe, base facts and rules. Immutable once built; safe to share across threads.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    atom_count: usize,
    base_facts: AtomSet,
    /// Sorted by rule id.
    rules: Vec<HornRule>,
    seed: u64,
    /// For each atom, indices (into `rules`) of the rules it is a premise of.
    watchers: Vec<Vec<u32>>,
}

impl KnowledgeBase {
    pub fn new(
        atom_count: usize,
        base_facts: impl IntoIterator<Item = AtomId>,
        rules: impl IntoIterator<Item = HornRule>,
    ) -> Result<Self> {
        if atom_count > u32::MAX as usize {
            return Err(Error::invalid("atom universe exceeds u32 range"));
        }
        let check = |a: AtomId| -> Result<()> {
            if a.index() >= atom_count {
                Err(Error::AtomOutOfRange {
                    atom: a.0,
                    atom_count,
                })
            } else {
                Ok(())
            }
        };
        let base_facts: AtomSet = base_facts.into_iter().collect();
        for &a in &base_facts {
            check(a)?;
        }
        let mut rules: Vec<HornRule> = rules.into_iter().collect();
        rules.sort_by_key(|r| r.id);
        for pair in rules.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::InvalidRule {
                    rule: pair[0].id.0,
                    reason: "duplicate rule id".into(),
                });
            }
        }
        let mut watchers = vec![Vec::new(); atom_count];
        for (idx, rule) in rules.iter().enumerate() {
            check(rule.conclusion)?;
            for &p in &rule.premises {
                check(p)?;
                watchers[p.index()].push(idx as u32);
            }
        }
        Ok(KnowledgeBase {
            atom_count,
            base_facts,
            rules,
            seed: 0,
            watchers,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn base_facts(&self) -> &AtomSet {
        &self.base_facts
    }

    pub fn rules(&self) -> &[HornRule] {
        &self.rules
    }

    pub fn generation_seed(&self) -> u64 {
        self.seed
    }

    /// Largest premise count over all rules (0 for a rule-free KB).
    pub fn max_arity(&self) -> usize {
        self.rules.iter().map(HornRule::arity).max().unwrap_or(0)
    }

    pub fn rule(&self, id: RuleId) -> Option<&HornRule> {
        self.rules
            .binary_search_by_key(&id, |r| r.id)
            .ok()
            .map(|i| &self.rules[i])
    }

    pub(crate) fn watchers(&self, atom: AtomId) -> &[u32] {
        &self.watchers[atom.index()]
    }

    pub fn contains_atom(&self, atom: AtomId) -> bool {
        atom.index() < self.atom_count
    }

    pub fn check_atoms<'a>(&self, atoms: impl IntoIterator<Item = &'a AtomId>) -> Result<()> {
        for &a in atoms {
            if !self.contains_atom(a) {
                return Err(Error::AtomOutOfRange {
                    atom: a.0,
                    atom_count: self.atom_count,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn mask_of<'a>(&self, atoms: impl IntoIterator<Item = &'a AtomId>) -> Vec<bool> {
        let mut mask = vec![false; self.atom_count];
        for &a in atoms {
            mask[a.index()] = true;
        }
        mask
    }

    /// All derivable non-base atoms, in ascending atom order, numbered from zero.
    pub fn answerable_queries(&self) -> Vec<Query> {
        let closure = chain::closure_mask(self, &self.mask_of(&self.base_facts));
        closure
            .iter()
            .enumerate()
            .filter(|&(i, &derived)| derived && !self.base_facts.contains(&AtomId(i as u32)))
            .enumerate()
            .map(|(qid, (i, _))| Query {
                query_id: qid as u32,
                target: AtomId(i as u32),
            })
            .collect()
    }

    /// Up to `count` answerable queries drawn uniformly without replacement, returned in
    /// ascending target order and renumbered from zero.
    pub fn sample_queries(&self, count: usize, seed: u64) -> Vec<Query> {
        let all = self.answerable_queries();
        if count >= all.len() {
            return all;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked: Vec<AtomId> = index::sample(&mut rng, all.len(), count)
            .into_iter()
            .map(|i| all[i].target)
            .collect();
        picked.sort_unstable();
        picked
            .into_iter()
            .enumerate()
            .map(|(qid, target)| Query {
                query_id: qid as u32,
                target,
            })
            .collect()
    }

    /// Applies `trace` in order starting from `start`. Fails if a rule fires before all of
    /// its premises are present.
    pub fn replay(&self, start: &AtomSet, trace: &[RuleId]) -> Result<AtomSet> {
        let mut have = start.clone();
        for &rid in trace {
            let rule = self.rule(rid).ok_or_else(|| Error::InvalidRule {
                rule: rid.0,
                reason: "unknown rule id in trace".into(),
            })?;
            if let Some(missing) = rule.premises.iter().find(|p| !have.contains(p)) {
                return Err(Error::InvalidRule {
                    rule: rid.0,
                    reason: format!("premise {missing} not available during replay"),
                });
            }
            have.insert(rule.conclusion);
        }
        Ok(have)
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn rule_validation() {
        assert!(HornRule::new(RuleId(0), [], a(1)).is_err());
        assert!(HornRule::new(RuleId(0), [a(1), a(2)], a(2)).is_err());
        let r = HornRule::new(RuleId(3), [a(2), a(1), a(2)], a(0)).unwrap();
        assert_eq!(r.premises(), &[a(1), a(2)]);
        assert_eq!(r.arity(), 2);
    }

    #[test]
    fn kb_rejects_out_of_range_and_duplicates() {
        assert!(matches!(
            KnowledgeBase::new(2, [a(5)], []),
            Err(Error::AtomOutOfRange { atom: 5, .. })
        ));
        assert!(KnowledgeBase::new(3, [a(0)], [rule(0, &[0], 3)]).is_err());
        assert!(KnowledgeBase::new(3, [a(0)], [rule(0, &[0], 1), rule(0, &[1], 2)]).is_err());
    }

    #[test]
    fn queries_are_derivable_non_base() {
        let kb = chain();
        let qs = kb.answerable_queries();
        assert_eq!(
            qs,
            vec![
                Query { query_id: 0, target: a(1) },
                Query { query_id: 1, target: a(2) }
            ]
        );
        assert_eq!(kb.sample_queries(10, 1), qs);
        assert_eq!(kb.sample_queries(1, 7).len(), 1);
    }

    #[test]
    fn replay_checks_premises() {
        let kb = chain();
        let out = kb.replay(&set(&[0]), &[RuleId(0), RuleId(1)]).unwrap();
        assert_eq!(out, set(&[0, 1, 2]));
        assert!(kb.replay(&set(&[0]), &[RuleId(1)]).is_err());
        assert!(kb.replay(&set(&[0]), &[RuleId(9)]).is_err());
    }
}
