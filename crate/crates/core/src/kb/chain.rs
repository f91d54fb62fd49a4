//! Forward chaining to the least fixpoint, linear in the total rule size.

use super::{AtomId, AtomSet, KnowledgeBase};
use crate::error::Result;

/// Least fixpoint of rule application from `start`.
pub fn forward_closure(kb: &KnowledgeBase, start: &AtomSet) -> Result<AtomSet> {
    kb.check_atoms(start)?;
    let mask = closure_mask(kb, &kb.mask_of(start));
    Ok(mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| AtomId(i as u32))
        .collect())
}

/// `target ∈ forward_closure(kb, start)`, stopping as soon as the target appears.
pub fn is_derivable(kb: &KnowledgeBase, target: AtomId, start: &AtomSet) -> Result<bool> {
    kb.check_atoms(start.iter().chain(std::iter::once(&target)))?;
    Ok(reaches(kb, &kb.mask_of(start), target))
}

pub(crate) fn closure_mask(kb: &KnowledgeBase, start: &[bool]) -> Vec<bool> {
    run(kb, start, None).0
}

pub(crate) fn reaches(kb: &KnowledgeBase, start: &[bool], target: AtomId) -> bool {
    run(kb, start, Some(target)).1
}

fn run(kb: &KnowledgeBase, start: &[bool], target: Option<AtomId>) -> (Vec<bool>, bool) {
    let mut have = start.to_vec();
    if let Some(t) = target {
        if have[t.index()] {
            return (have, true);
        }
    }
    let rules = kb.rules();
    let mut missing: Vec<usize> = rules.iter().map(|r| r.arity()).collect();
    let mut agenda: Vec<AtomId> = have
        .iter()
        .enumerate()
        .filter(|(_, &h)| h)
        .map(|(i, _)| AtomId(i as u32))
        .collect();
    while let Some(atom) = agenda.pop() {
        for &ri in kb.watchers(atom) {
            let ri = ri as usize;
            missing[ri] -= 1;
            if missing[ri] == 0 {
                let c = rules[ri].conclusion();
                if !have[c.index()] {
                    have[c.index()] = true;
                    if target == Some(c) {
                        return (have, true);
                    }
                    agenda.push(c);
                }
            }
        }
    }
    (have, false)
}
