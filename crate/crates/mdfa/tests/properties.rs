//! Randomised cross-checks of the structural laws the library promises:
//! monotonicity in the removal budget, the strong-to-weak implication and
//! its converse with an inflated budget, witness replays, agreement between
//! the fast implementations and the brute-force oracles, and invariance
//! under relabeling agents with identical valuations.

use mdfa::allocate::{allocate, audit};
use mdfa::decide::{exists_strong, exists_weak, Decision};
use mdfa::generators::random_instance;
use mdfa::oracle::{oracle_exists, oracle_verify_strong, oracle_verify_weak};
use mdfa::verify::{min_removal_size, verify_strong, verify_weak};
use mdfa::{Allocation, FairnessQuery, Instance};
use proptest::prelude::*;

/// Random small instance plus an assignment of its items.
fn instance_and_assignment() -> impl Strategy<Value = (Instance, Vec<usize>)> {
    (2usize..=3, 0usize..=5, 1usize..=3, 0u64..=4, any::<bool>(), any::<u64>()).prop_flat_map(
        |(n, m, dims, v_max, identical, seed)| {
            let inst = random_instance(seed, n, m, dims, v_max, identical);
            (Just(inst), proptest::collection::vec(0..n, m))
        },
    )
}

fn small_instance() -> impl Strategy<Value = Instance> {
    (2usize..=3, 0usize..=5, 1usize..=2, 0u64..=3, any::<bool>(), any::<u64>()).prop_map(
        |(n, m, dims, v_max, identical, seed)| random_instance(seed, n, m, dims, v_max, identical),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn satisfaction_is_monotone_in_the_budget(
        (inst, assign) in instance_and_assignment(),
        c in 0usize..=3,
    ) {
        let alloc = Allocation::from_assignment(inst.agents(), &assign);
        let weak_c = verify_weak(&inst, &alloc, c).unwrap().satisfied();
        let weak_c1 = verify_weak(&inst, &alloc, c + 1).unwrap().satisfied();
        prop_assert!(!weak_c || weak_c1);
        let strong_c = verify_strong(&inst, &alloc, c).unwrap().satisfied();
        let strong_c1 = verify_strong(&inst, &alloc, c + 1).unwrap().satisfied();
        prop_assert!(!strong_c || strong_c1);
    }

    #[test]
    fn strong_implies_weak_implies_inflated_strong(
        (inst, assign) in instance_and_assignment(),
        c in 0usize..=2,
    ) {
        let alloc = Allocation::from_assignment(inst.agents(), &assign);
        let strong = verify_strong(&inst, &alloc, c).unwrap().satisfied();
        let weak = verify_weak(&inst, &alloc, c).unwrap().satisfied();
        prop_assert!(!strong || weak, "strong sEFc must imply weak sEFc");
        let inflated = verify_strong(&inst, &alloc, inst.dims() * c).unwrap().satisfied();
        prop_assert!(!weak || inflated, "weak sEFc must imply strong sEF(dims * c)");
    }

    #[test]
    fn witnesses_replay_and_violations_are_honest(
        (inst, assign) in instance_and_assignment(),
        c in 0usize..=2,
    ) {
        let alloc = Allocation::from_assignment(inst.agents(), &assign);
        let weak = verify_weak(&inst, &alloc, c).unwrap();
        if let Some(w) = weak.witness() {
            prop_assert!(w.replay(&inst, &alloc, c).unwrap());
        }
        let strong = verify_strong(&inst, &alloc, c).unwrap();
        if let Some(w) = strong.witness() {
            prop_assert!(w.replay(&inst, &alloc, c).unwrap());
        }
        prop_assert_eq!(weak.satisfied(), oracle_verify_weak(&inst, &alloc, c).unwrap());
        prop_assert_eq!(strong.satisfied(), oracle_verify_strong(&inst, &alloc, c).unwrap());
    }

    #[test]
    fn minimal_removal_sizes_match_subset_scans(
        (inst, assign) in instance_and_assignment(),
    ) {
        let alloc = Allocation::from_assignment(inst.agents(), &assign);
        for envier in 0..inst.agents() {
            for envied in 0..inst.agents() {
                if envier == envied {
                    continue;
                }
                let fast = min_removal_size(&inst, &alloc, envier, envied).unwrap();
                let slow = (0..=alloc.bundle(envied).len())
                    .find(|&budget| {
                        oracle_verify_pair(&inst, &alloc, envier, envied, budget)
                    })
                    .unwrap();
                prop_assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn deciders_agree_with_the_oracle(inst in small_instance(), c in 0usize..=2) {
        let weak_dp = matches!(exists_weak(&inst, c).unwrap().decision, Decision::Exists(_));
        let weak_oracle = oracle_exists(&inst, FairnessQuery::weak(c)).unwrap().found.is_some();
        prop_assert_eq!(weak_dp, weak_oracle);
        let strong_dp = matches!(exists_strong(&inst, c).unwrap().decision, Decision::Exists(_));
        let strong_oracle =
            oracle_exists(&inst, FairnessQuery::strong(c)).unwrap().found.is_some();
        prop_assert_eq!(strong_dp, strong_oracle);
    }

    #[test]
    fn decided_witnesses_satisfy_what_they_claim(inst in small_instance(), c in 0usize..=2) {
        if let Decision::Exists(alloc) = exists_weak(&inst, c).unwrap().decision {
            prop_assert!(verify_weak(&inst, &alloc, c).unwrap().satisfied());
        }
        if let Decision::Exists(alloc) = exists_strong(&inst, c).unwrap().decision {
            prop_assert!(verify_strong(&inst, &alloc, c).unwrap().satisfied());
        }
    }

    #[test]
    fn allocator_guarantees_hold_on_random_instances(
        n in 1usize..=3,
        m in 0usize..=12,
        dims in 1usize..=2,
        v_max in 0u64..=5,
        identical in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let inst = random_instance(seed, n, m, dims, v_max, identical);
        let res = allocate(&inst).unwrap();
        audit(&inst, &res).unwrap();
        let total: usize = res.allocation.bundles().iter().map(|b| b.len()).sum();
        prop_assert_eq!(total, m);
    }

    #[test]
    fn identical_agents_make_fairness_permutation_invariant(
        m in 0usize..=5,
        dims in 1usize..=2,
        v_max in 0u64..=3,
        seed in any::<u64>(),
        assign in proptest::collection::vec(0usize..2, 0..=5),
        c in 0usize..=2,
    ) {
        let assign: Vec<usize> = assign.into_iter().take(m).collect();
        prop_assume!(assign.len() == m);
        let inst = random_instance(seed, 2, m, dims, v_max, true);
        let alloc = Allocation::from_assignment(2, &assign);
        let swapped: Vec<usize> = assign.iter().map(|&a| 1 - a).collect();
        let alloc_swapped = Allocation::from_assignment(2, &swapped);
        prop_assert_eq!(
            verify_weak(&inst, &alloc, c).unwrap().satisfied(),
            verify_weak(&inst, &alloc_swapped, c).unwrap().satisfied()
        );
        prop_assert_eq!(
            verify_strong(&inst, &alloc, c).unwrap().satisfied(),
            verify_strong(&inst, &alloc_swapped, c).unwrap().satisfied()
        );
    }

    #[test]
    fn round_robin_bundles_never_exceed_the_ceiling(
        n in 1usize..=4,
        m in 0usize..=16,
    ) {
        let alloc = Allocation::round_robin(n, m);
        for bundle in alloc.bundles() {
            prop_assert!(bundle.len() <= m.div_ceil(n));
        }
        let total: usize = alloc.bundles().iter().map(|b| b.len()).sum();
        prop_assert_eq!(total, m);
    }
}

/// Subset scan for one ordered pair only, used as the min-removal oracle.
fn oracle_verify_pair(
    inst: &Instance,
    alloc: &Allocation,
    envier: usize,
    envied: usize,
    budget: usize,
) -> bool {
    let bundle = alloc.bundle(envied);
    let dims = inst.dims();
    let own: Vec<u64> = (0..dims)
        .map(|k| inst.bundle_value(envier, alloc.bundle(envier), k).unwrap())
        .collect();
    let totals: Vec<u64> = (0..dims)
        .map(|k| inst.bundle_value(envier, bundle, k).unwrap())
        .collect();
    'masks: for mask in 0u64..(1u64 << bundle.len()) {
        if mask.count_ones() as usize > budget {
            continue;
        }
        for k in 0..dims {
            let removed: u64 = bundle
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << *b) != 0)
                .map(|(_, &j)| inst.value(envier, j, k))
                .sum();
            if own[k] < totals[k].saturating_sub(removed) {
                continue 'masks;
            }
        }
        return true;
    }
    false
}
