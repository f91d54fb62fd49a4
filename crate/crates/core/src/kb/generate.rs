//! Layered synthetic knowledge bases with a controllable mean query depth.
//!
//! Atoms are split into `L + 1` levels; level 0 holds the base facts. Every rule concludes
//! an atom exactly one level above its highest premise: one premise (the spine) is taken
//! from the level directly below, the others from lower levels. The rule graph is therefore
//! acyclic. The number of levels is searched until the exhaustively measured mean depth of
//! the answerable queries lands within tolerance of the target.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AtomId, HornRule, KnowledgeBase, RuleId};
use crate::error::{Error, Result};
use crate::num::splitmix64;

/// Relative tolerance on the achieved mean depth.
pub const DEPTH_TOLERANCE: f64 = 0.30;

const MAX_LEVELS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KbGenParams {
    pub atom_count: usize,
    pub rule_count: usize,
    pub target_mean_depth: f64,
    pub max_arity: usize,
    pub seed: u64,
}

impl KbGenParams {
    pub fn new(atom_count: usize, rule_count: usize, target_mean_depth: f64, max_arity: usize, seed: u64) -> Self {
        KbGenParams {
            atom_count,
            rule_count,
            target_mean_depth,
            max_arity,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.atom_count < 10 {
            return Err(Error::invalid(format!("atom_count must be >= 10, got {}", self.atom_count)));
        }
        if !(2..=4).contains(&self.max_arity) {
            return Err(Error::invalid(format!("max_arity must be in 2..=4, got {}", self.max_arity)));
        }
        if !(self.target_mean_depth.is_finite() && self.target_mean_depth > 0.0) {
            return Err(Error::invalid("target_mean_depth must be positive"));
        }
        Ok(())
    }
}

/// Builds a KB whose answerable queries have mean depth within ±30% of the target.
///
/// `rule_count == 0` yields the degenerate KB in which every atom is a base fact.
pub fn generate_kb(params: &KbGenParams) -> Result<KnowledgeBase> {
    params.validate()?;
    if params.rule_count == 0 {
        let all = (0..params.atom_count as u32).map(AtomId);
        return Ok(KnowledgeBase::new(params.atom_count, all, [])?.with_seed(params.seed));
    }

    let max_levels = MAX_LEVELS.min(params.atom_count - 1).min(params.rule_count);
    let mut cache: BTreeMap<usize, (f64, KnowledgeBase)> = BTreeMap::new();
    let mut eval = |levels: usize| -> Result<f64> {
        if let Some((d, _)) = cache.get(&levels) {
            return Ok(*d);
        }
        let kb = build_layered(params, levels)?;
        let d = mean_query_depth(&kb);
        cache.insert(levels, (d, kb));
        Ok(d)
    };

    // Mean depth grows with the number of levels; find the first level count reaching the
    // target, then keep whichever neighbour is closer.
    let (mut lo, mut hi) = (1usize, max_levels);
    if eval(hi)? < params.target_mean_depth {
        lo = hi;
    } else {
        while lo < hi {
            let mid = (lo + hi) / 2;
            if eval(mid)? >= params.target_mean_depth {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
    }
    let mut best = lo;
    if lo > 1 {
        let below = eval(lo - 1)?;
        if (below - params.target_mean_depth).abs() < (eval(lo)? - params.target_mean_depth).abs() {
            best = lo - 1;
        }
    }
    let achieved = eval(best)?;
    let rel = (achieved - params.target_mean_depth).abs() / params.target_mean_depth;
    if rel > DEPTH_TOLERANCE {
        return Err(Error::Construction(format!(
            "cannot reach mean depth {:.2} with {} atoms and {} rules (closest {:.2} at {} levels)",
            params.target_mean_depth, params.atom_count, params.rule_count, achieved, best
        )));
    }
    let (_, kb) = cache.remove(&best).expect("evaluated level count is cached");
    log::debug!(
        "generated kb: {} atoms, {} rules, {} levels, mean depth {:.3}",
        params.atom_count,
        params.rule_count,
        best,
        achieved
    );
    Ok(kb)
}

/// Mean depth of the answerable (derivable, non-base) atoms, measured exhaustively.
pub fn mean_query_depth(kb: &KnowledgeBase) -> f64 {
    let map = super::DepthMap::from_mask(kb, &kb.mask_of(kb.base_facts()));
    let (sum, n) = kb
        .answerable_queries()
        .iter()
        .filter_map(|q| map.depth(q.target))
        .fold((0.0, 0usize), |(s, n), d| (s + d as f64, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn build_layered(params: &KbGenParams, levels: usize) -> Result<KnowledgeBase> {
    let n = params.atom_count;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(params.seed ^ (levels as u64).rotate_left(32)));

    // Atom ids are a random permutation so that id order carries no level information.
    let mut ids: Vec<u32> = (0..n as u32).collect();
    ids.shuffle(&mut rng);
    let per_level = n / (levels + 1);
    let extra = n % (levels + 1);
    let mut layer: Vec<Vec<AtomId>> = Vec::with_capacity(levels + 1);
    let mut next = 0;
    for lvl in 0..=levels {
        let size = per_level + usize::from(lvl < extra);
        layer.push(ids[next..next + size].iter().map(|&i| AtomId(i)).collect());
        next += size;
    }

    // Derivable atoms per level, in the order they became derivable.
    let mut derivable: Vec<Vec<AtomId>> = vec![Vec::new(); levels + 1];
    derivable[0] = layer[0].clone();
    let mut is_derivable = vec![false; n];
    for &a in &layer[0] {
        is_derivable[a.index()] = true;
    }

    let mut rules = Vec::with_capacity(params.rule_count);
    // First pass: one rule per non-base atom, interleaving levels so that every level
    // has derivable atoms as early as possible.
    let widest = layer.iter().skip(1).map(Vec::len).max().unwrap_or(0);
    'first: for pos in 0..widest {
        for lvl in 1..=levels {
            if rules.len() == params.rule_count {
                break 'first;
            }
            let Some(&atom) = layer[lvl].get(pos) else { continue };
            if derivable[lvl - 1].is_empty() {
                continue;
            }
            push_rule(&mut rules, &mut rng, &derivable, lvl, atom, params.max_arity)?;
            is_derivable[atom.index()] = true;
            derivable[lvl].push(atom);
        }
    }
    // Remaining rules add alternative derivations.
    let non_base: Vec<(usize, AtomId)> = (1..=levels)
        .flat_map(|lvl| layer[lvl].iter().map(move |&a| (lvl, a)))
        .collect();
    while rules.len() < params.rule_count && !non_base.is_empty() {
        let (lvl, atom) = non_base[rng.gen_range(0..non_base.len())];
        if derivable[lvl - 1].is_empty() {
            continue;
        }
        push_rule(&mut rules, &mut rng, &derivable, lvl, atom, params.max_arity)?;
        if !is_derivable[atom.index()] {
            is_derivable[atom.index()] = true;
            derivable[lvl].push(atom);
        }
    }

    Ok(KnowledgeBase::new(n, layer[0].iter().copied(), rules)?.with_seed(params.seed))
}

fn push_rule(
    rules: &mut Vec<HornRule>,
    rng: &mut ChaCha8Rng,
    derivable: &[Vec<AtomId>],
    level: usize,
    conclusion: AtomId,
    max_arity: usize,
) -> Result<()> {
    let arity = rng.gen_range(1..=max_arity);
    let spine = *derivable[level - 1].choose(rng).expect("lower level has a derivable atom");
    let mut premises = vec![spine];
    for _ in 1..arity {
        let lvl = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..level) };
        premises.push(*derivable[lvl].choose(rng).expect("level 0 is never empty"));
    }
    let id = RuleId(rules.len() as u32);
    rules.push(HornRule::new(id, premises, conclusion)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{forward_closure, logical_depth};

    /// Mean depth recomputed target by target with single-target searches.
    fn brute_mean_depth(kb: &KnowledgeBase) -> f64 {
        let queries = kb.answerable_queries();
        let total: u64 = queries
            .iter()
            .map(|q| logical_depth(kb, q.target, kb.base_facts()).unwrap().depth.unwrap())
            .sum();
        total as f64 / queries.len() as f64
    }

    #[test]
    fn thousand_atoms_depth_five() {
        let kb = generate_kb(&KbGenParams::new(1000, 3000, 5.0, 2, 42)).unwrap();
        assert_eq!(kb.atom_count(), 1000);
        assert_eq!(kb.rules().len(), 3000);
        let d = brute_mean_depth(&kb);
        assert!((3.5..=6.5).contains(&d), "mean depth {d}");
        assert!(kb.max_arity() <= 2);
    }

    #[test]
    fn hundred_atoms_depth_three_measured_exhaustively() {
        let kb = generate_kb(&KbGenParams::new(100, 300, 3.0, 2, 7)).unwrap();
        let d = brute_mean_depth(&kb);
        assert!((d - mean_query_depth(&kb)).abs() < 1e-12);
        assert!((2.1..=3.9).contains(&d), "mean depth {d}");
    }

    #[test]
    fn zero_rules_means_all_base() {
        let kb = generate_kb(&KbGenParams::new(10, 0, 1.0, 2, 1)).unwrap();
        assert_eq!(kb.base_facts().len(), 10);
        assert!(kb.answerable_queries().is_empty());
        for i in 0..10 {
            let r = logical_depth(&kb, AtomId(i), kb.base_facts()).unwrap();
            assert_eq!(r.depth, Some(0));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let p = KbGenParams::new(300, 900, 4.0, 3, 99);
        let a = generate_kb(&p).unwrap();
        let b = generate_kb(&p).unwrap();
        assert_eq!(a.rules(), b.rules());
        assert_eq!(a.base_facts(), b.base_facts());
        let c = generate_kb(&KbGenParams { seed: 100, ..p }).unwrap();
        assert_ne!(a.rules(), c.rules());
    }

    #[test]
    fn every_non_base_atom_with_a_rule_is_derivable() {
        let kb = generate_kb(&KbGenParams::new(500, 1500, 4.0, 4, 3)).unwrap();
        let closure = forward_closure(&kb, kb.base_facts()).unwrap();
        for r in kb.rules() {
            assert!(closure.contains(&r.conclusion()));
            assert!(r.arity() <= 4);
        }
    }

    #[test]
    fn infeasible_parameters_fail_explicitly() {
        // One rule cannot produce mean depth 20.
        let err = generate_kb(&KbGenParams::new(100, 1, 20.0, 2, 1)).unwrap_err();
        assert!(matches!(err, Error::Construction(_)), "{err}");
        assert!(generate_kb(&KbGenParams::new(5, 10, 2.0, 2, 1)).is_err());
        assert!(generate_kb(&KbGenParams::new(50, 10, 2.0, 5, 1)).is_err());
    }
}
