//! Random micro-instances and law checkers shared by the property suites and the
//! acceptance report.
#![allow(dead_code)]

use derivd_core::kb::{atomic_decomposition, forward_closure, AtomId, AtomSet, DepthMap, HornRule, KnowledgeBase, RuleId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_subset(rng: &mut ChaCha8Rng, n: usize, p: f64) -> AtomSet {
    (0..n as u32).filter(|_| rng.gen_bool(p)).map(AtomId).collect()
}

/// A KB over 5–12 atoms with 1–3 premise rules and a small random base.
pub fn random_kb(rng: &mut ChaCha8Rng) -> KnowledgeBase {
    let n = rng.gen_range(5..=12usize);
    let m = rng.gen_range(n..=2 * n);
    let mut rules = Vec::with_capacity(m);
    for id in 0..m as u32 {
        let k = rng.gen_range(1..=3usize);
        let mut prem: Vec<u32> = (0..k).map(|_| rng.gen_range(0..n as u32)).collect();
        prem.sort_unstable();
        prem.dedup();
        let concl = loop {
            let c = rng.gen_range(0..n as u32);
            if !prem.contains(&c) {
                break c;
            }
        };
        rules.push(HornRule::new(RuleId(id), prem.into_iter().map(AtomId), AtomId(concl)).unwrap());
    }
    let mut base = random_subset(rng, n, 0.25);
    if base.is_empty() {
        base.insert(AtomId(0));
    }
    KnowledgeBase::new(n, base, rules).unwrap()
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct LawViolations {
    pub zero_depth: usize,
    pub monotonicity: usize,
    pub transitivity: usize,
    pub subadditivity: usize,
    pub checks: usize,
}

impl LawViolations {
    pub fn total(&self) -> usize {
        self.zero_depth + self.monotonicity + self.transitivity + self.subadditivity
    }
}

/// Checks the four depth laws on `instances` random KBs.
pub fn depth_laws(instances: usize, seed: u64) -> LawViolations {
    let mut v = LawViolations::default();
    let mut r = rng(seed);
    for _ in 0..instances {
        let kb = random_kb(&mut r);
        let n = kb.atom_count();
        let a1 = kb.base_facts().clone();
        let mut a2 = a1.clone();
        a2.extend(random_subset(&mut r, n, 0.2));
        let d1 = DepthMap::compute(&kb, &a1).unwrap();
        let d2 = DepthMap::compute(&kb, &a2).unwrap();
        for q in (0..n as u32).map(AtomId) {
            v.checks += 1;
            if (d1.depth(q) == Some(0)) != a1.contains(&q) {
                v.zero_depth += 1;
            }
            if let Some(x1) = d1.depth(q) {
                if !matches!(d2.depth(q), Some(x2) if x2 <= x1) {
                    v.monotonicity += 1;
                }
            }
        }
        for phi in (0..n as u32).map(AtomId) {
            let Some(dphi) = d1.depth(phi) else { continue };
            let mut with_phi = a1.clone();
            with_phi.insert(phi);
            let dp = DepthMap::compute(&kb, &with_phi).unwrap();
            for chi in (0..n as u32).map(AtomId) {
                if let Some(dchi_phi) = dp.depth(chi) {
                    v.checks += 1;
                    if !matches!(d1.depth(chi), Some(d) if d <= dphi + dchi_phi) {
                        v.transitivity += 1;
                    }
                }
            }
        }
        for rule in kb.rules() {
            let prem: Option<Vec<u64>> = rule.premises().iter().map(|&p| d1.depth(p)).collect();
            if let Some(ds) = prem {
                v.checks += 1;
                if !matches!(d1.depth(rule.conclusion()), Some(d) if d <= ds.iter().sum::<u64>() + 1) {
                    v.subadditivity += 1;
                }
            }
        }
    }
    v
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct DecompositionViolations {
    pub closure: usize,
    pub idempotence: usize,
    pub independence: usize,
}

/// Closure equality, idempotence and independence of `atomic_decomposition`.
pub fn decomposition_laws(instances: usize, seed: u64) -> DecompositionViolations {
    let mut v = DecompositionViolations::default();
    let mut r = rng(seed);
    for _ in 0..instances {
        let kb = random_kb(&mut r);
        let a = random_subset(&mut r, kb.atom_count(), 0.5);
        let d = atomic_decomposition(&kb, &a).unwrap();
        if forward_closure(&kb, &d).unwrap() != forward_closure(&kb, &a).unwrap() || !d.is_subset(&a) {
            v.closure += 1;
        }
        if atomic_decomposition(&kb, &d).unwrap() != d {
            v.idempotence += 1;
        }
        for &alpha in &d {
            let mut rest = d.clone();
            rest.remove(&alpha);
            if forward_closure(&kb, &rest).unwrap().contains(&alpha) {
                v.independence += 1;
            }
        }
    }
    v
}

/// Fewest rule firings that derive each atom from `start`, by breadth-first search over
/// derived sets. Only for KBs of at most 16 atoms.
pub fn min_sequence_lengths(kb: &KnowledgeBase, start: &AtomSet) -> Vec<Option<u64>> {
    let n = kb.atom_count();
    assert!(n <= 16);
    let bit = |a: AtomId| 1u32 << a.0;
    let init: u32 = start.iter().map(|&a| bit(a)).sum();
    let mut dist = vec![u64::MAX; 1 << n];
    let mut best = vec![None; n];
    dist[init as usize] = 0;
    let mut frontier = vec![init];
    let mut level = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &s in &frontier {
            for (i, b) in best.iter_mut().enumerate() {
                if s & (1 << i) != 0 && b.is_none() {
                    *b = Some(level);
                }
            }
            for rule in kb.rules() {
                let c = bit(rule.conclusion());
                if s & c == 0 && rule.premises().iter().all(|&p| s & bit(p) != 0) {
                    let t = s | c;
                    if dist[t as usize] == u64::MAX {
                        dist[t as usize] = level + 1;
                        next.push(t);
                    }
                }
            }
        }
        frontier = next;
        level += 1;
    }
    best
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct SequenceReport {
    /// Transitivity failures of the brute-force sequence length.
    pub sequence_transitivity: usize,
    /// Atoms where tree cost is below the sequence length.
    pub tree_below_sequence: usize,
    /// Tree-cost transitivity failures where the tree cost of χ equals its sequence length.
    pub unexplained_tree_failures: usize,
    pub tree_failures: usize,
}

pub fn sequence_checks(instances: usize, seed: u64) -> SequenceReport {
    let mut out = SequenceReport::default();
    let mut r = rng(seed);
    for _ in 0..instances {
        let kb = random_kb(&mut r);
        let n = kb.atom_count();
        let a = kb.base_facts().clone();
        let tree = DepthMap::compute(&kb, &a).unwrap();
        let seq = min_sequence_lengths(&kb, &a);
        for (q, &s) in seq.iter().enumerate().take(n) {
            if let (Some(t), Some(s)) = (tree.depth(AtomId(q as u32)), s) {
                if t < s {
                    out.tree_below_sequence += 1;
                }
            }
        }
        for phi in 0..n as u32 {
            let Some(s_phi) = seq[phi as usize] else { continue };
            let mut with_phi = a.clone();
            with_phi.insert(AtomId(phi));
            let seq_phi = min_sequence_lengths(&kb, &with_phi);
            let tree_phi = DepthMap::compute(&kb, &with_phi).unwrap();
            for chi in 0..n {
                if let Some(s2) = seq_phi[chi] {
                    if !matches!(seq[chi], Some(s) if s <= s_phi + s2) {
                        out.sequence_transitivity += 1;
                    }
                }
                let (Some(t_phi), Some(t2)) = (tree.depth(AtomId(phi)), tree_phi.depth(AtomId(chi as u32))) else {
                    continue;
                };
                let t_chi = tree.depth(AtomId(chi as u32)).unwrap();
                if t_chi > t_phi + t2 {
                    out.tree_failures += 1;
                    if Some(t_chi) == seq[chi] {
                        out.unexplained_tree_failures += 1;
                    }
                }
            }
        }
    }
    out
}

use derivd_core::kb::Query;
use derivd_core::metrics::{ContentIndex, InfoModel};
use derivd_core::policies::{Capacity, StoragePlan, StoredItem};
use derivd_core::workload::{DistKind, QueryDistribution};

/// A random KB with at least `min_queries` answerable queries, its content index under
/// `bits_per_atom = 3`, and random query weights.
pub struct InfoInstance {
    pub kb: KnowledgeBase,
    pub index: ContentIndex,
    pub dist: QueryDistribution,
    pub queries: Vec<Query>,
}

pub fn info_instance(r: &mut ChaCha8Rng, min_queries: usize) -> InfoInstance {
    loop {
        let kb = random_kb(r);
        let queries = kb.answerable_queries();
        if queries.len() < min_queries {
            continue;
        }
        let mut model = InfoModel::for_atom_count(kb.atom_count());
        model.bits_per_atom = 3.0;
        let index = ContentIndex::build(&kb, &queries, &model).unwrap();
        let weights: Vec<f64> = queries.iter().map(|_| r.gen_range(0.05..1.0)).collect();
        let dist = QueryDistribution::from_weights(queries.clone(), weights, DistKind::Uniform).unwrap();
        return InfoInstance { kb, index, dist, queries };
    }
}

impl InfoInstance {
    /// Answers of every query, then single atoms, up to `limit` items.
    pub fn candidates(&self, limit: usize) -> Vec<StoredItem> {
        let mut items: Vec<StoredItem> = self.queries.iter().map(|q| StoredItem::Answer(q.target)).collect();
        items.extend((0..self.kb.atom_count() as u32).map(|a| StoredItem::Atom(AtomId(a))));
        items.truncate(limit);
        items
    }

    pub fn plan(&self, items: &[StoredItem]) -> StoragePlan {
        let mut plan = StoragePlan::new(Capacity::Unbounded);
        for &it in items {
            plan.insert(it, self.index.item_bits(it).unwrap()).unwrap();
        }
        plan
    }

    pub fn mi(&self, items: &[StoredItem]) -> f64 {
        self.index.mutual_info(&self.plan(items), &self.dist).unwrap()
    }

    /// Coverage oracle written from the definitions: an atom of `q`'s proof is known when
    /// `q`'s own answer, the atom itself, or an answer for that atom is stored.
    pub fn oracle_mi(&self, items: &[StoredItem]) -> f64 {
        let depth = DepthMap::compute(&self.kb, self.kb.base_facts()).unwrap();
        let stored = |it: StoredItem| items.contains(&it);
        let bits = self.index.model().bits_per_atom;
        let mut total = 0.0;
        for (q, f) in self.dist.iter() {
            let trace = depth.trace_atoms(&self.kb, q.target);
            let known = trace
                .iter()
                .filter(|&&a| stored(StoredItem::Answer(q.target)) || stored(StoredItem::Atom(a)) || stored(StoredItem::Answer(a)))
                .count();
            total += f * known as f64 * bits * std::f64::consts::LN_2;
        }
        total
    }
}

pub fn subset(items: &[StoredItem], mask: u32) -> Vec<StoredItem> {
    items.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &x)| x).collect()
}

#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct InfoReport {
    pub oracle_mismatches: usize,
    pub oracle_checks: usize,
    pub submodularity_violations: usize,
    pub monotonicity_violations: usize,
    pub pairs: usize,
    pub worst_submodularity_gap: f64,
    pub greedy_failures: usize,
    pub greedy_instances: usize,
    pub worst_greedy_ratio: f64,
}

/// All `2^k` plans over up to 12 candidates of a few instances against the oracle.
pub fn brute_force_oracle(instances: usize, seed: u64, report: &mut InfoReport) {
    let mut r = rng(seed);
    for _ in 0..instances {
        let inst = info_instance(&mut r, 4);
        let items = inst.candidates(12);
        for mask in 0..(1u32 << items.len()) {
            let s = subset(&items, mask);
            report.oracle_checks += 1;
            if (inst.mi(&s) - inst.oracle_mi(&s)).abs() > 1e-9 {
                report.oracle_mismatches += 1;
            }
        }
    }
}

/// Diminishing returns on random pairs `S ⊆ T`, `x ∉ T`.
pub fn submodularity_pairs(pairs: usize, seed: u64, report: &mut InfoReport) {
    let mut r = rng(seed);
    report.worst_submodularity_gap = f64::NEG_INFINITY;
    let mut inst = info_instance(&mut r, 3);
    for i in 0..pairs {
        if i % 10 == 0 {
            inst = info_instance(&mut r, 3);
        }
        let items = inst.candidates(16);
        let x = r.gen_range(0..items.len());
        let t_mask: u32 = r.gen_range(0..(1u32 << items.len())) & !(1 << x);
        let s_mask: u32 = t_mask & r.gen::<u32>();
        let with = |m: u32| subset(&items, m | (1 << x));
        let gain_s = inst.mi(&with(s_mask)) - inst.mi(&subset(&items, s_mask));
        let gain_t = inst.mi(&with(t_mask)) - inst.mi(&subset(&items, t_mask));
        report.pairs += 1;
        report.worst_submodularity_gap = report.worst_submodularity_gap.max(gain_t - gain_s);
        if gain_s < gain_t - 1e-9 {
            report.submodularity_violations += 1;
        }
        if inst.mi(&subset(&items, s_mask)) > inst.mi(&subset(&items, t_mask)) + 1e-9 {
            report.monotonicity_violations += 1;
        }
    }
}

/// Lazy greedy against the exhaustive optimum over answers, cardinality `k ∈ 1..=4`.
pub fn greedy_vs_optimum(instances: usize, seed: u64, report: &mut InfoReport) {
    use derivd_core::policies::truemi_select;
    let mut r = rng(seed);
    report.worst_greedy_ratio = f64::INFINITY;
    for _ in 0..instances {
        let inst = info_instance(&mut r, 4);
        let answers: Vec<StoredItem> = inst.candidates(inst.queries.len().min(12));
        let k = r.gen_range(1..=4usize.min(answers.len()));
        let greedy = truemi_select(&inst.index, &inst.queries, &inst.dist, Capacity::Entries(k)).unwrap();
        let g = inst.index.mutual_info(&greedy, &inst.dist).unwrap();
        let opt = (0..(1u32 << answers.len()))
            .filter(|m| m.count_ones() as usize <= k)
            .map(|m| inst.mi(&subset(&answers, m)))
            .fold(0.0, f64::max);
        report.greedy_instances += 1;
        if opt > 0.0 {
            report.worst_greedy_ratio = report.worst_greedy_ratio.min(g / opt);
        }
        if g < (1.0 - (-1.0f64).exp()) * opt - 1e-9 {
            report.greedy_failures += 1;
        }
    }
}
