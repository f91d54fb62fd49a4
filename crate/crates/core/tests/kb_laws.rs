mod common;

use common::{decomposition_laws, depth_laws, sequence_checks};

#[test]
fn zero_depth_monotonicity_and_subadditivity() {
    let v = depth_laws(1000, 1);
    assert_eq!((v.zero_depth, v.monotonicity, v.subadditivity), (0, 0, 0), "{v:?}");
}

#[test]
fn transitivity_failures_of_tree_cost_come_from_shared_subproofs() {
    let s = sequence_checks(300, 3);
    assert_eq!(s.sequence_transitivity, 0, "{s:?}");
    assert_eq!(s.tree_below_sequence, 0, "{s:?}");
    assert_eq!(s.unexplained_tree_failures, 0, "{s:?}");
}

#[test]
fn reused_intermediate_breaks_tree_transitivity() {
    use derivd_core::kb::{AtomId, DepthMap, HornRule, KnowledgeBase, RuleId};
    // 0 → 1 → 2 → φ=3; φ → 4; φ → 5; {4, 5} → χ=6.
    let r = |id, p: &[u32], c| HornRule::new(RuleId(id), p.iter().map(|&x| AtomId(x)), AtomId(c)).unwrap();
    let kb = KnowledgeBase::new(
        7,
        [AtomId(0)],
        [r(0, &[0], 1), r(1, &[1], 2), r(2, &[2], 3), r(3, &[3], 4), r(4, &[3], 5), r(5, &[4, 5], 6)],
    )
    .unwrap();
    let base = kb.base_facts().clone();
    let d = DepthMap::compute(&kb, &base).unwrap();
    let mut with_phi = base.clone();
    with_phi.insert(AtomId(3));
    let dp = DepthMap::compute(&kb, &with_phi).unwrap();
    assert_eq!(d.depth(AtomId(3)), Some(3));
    assert_eq!(dp.depth(AtomId(6)), Some(3));
    // The proof tree copies φ's three steps into both branches.
    assert_eq!(d.depth(AtomId(6)), Some(9));
    assert_eq!(common::min_sequence_lengths(&kb, &base)[6], Some(6));
}

#[test]
fn decomposition_laws_hold_on_random_kbs() {
    let v = decomposition_laws(1000, 2);
    assert_eq!(v, Default::default());
}
