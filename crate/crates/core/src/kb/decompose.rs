use super::{chain, AtomId, AtomSet, KnowledgeBase};
use crate::error::Result;

/// Removes every atom that the remaining atoms already derive.
///
/// Atoms are examined in ascending order and dropped one at a time, so the closure is
/// preserved at every step even when the rule graph has cycles. On acyclic rule sets the
/// result equals `{α ∈ A : A \ {α} ⊬ α}` and is therefore independent of the order.
pub fn atomic_decomposition(kb: &KnowledgeBase, atoms: &AtomSet) -> Result<AtomSet> {
    kb.check_atoms(atoms)?;
    let mut mask = kb.mask_of(atoms);
    for &alpha in atoms {
        mask[alpha.index()] = false;
        if !chain::reaches(kb, &mask, alpha) {
            mask[alpha.index()] = true;
        }
    }
    Ok(atoms.iter().copied().filter(|a: &AtomId| mask[a.index()]).collect())
}
