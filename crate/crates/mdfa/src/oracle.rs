//! Brute-force reference implementations.
//!
//! Everything here is written to be obviously correct rather than fast, and
//! deliberately shares no search logic with [`crate::verify`] or
//! [`crate::decide`]: fairness of a single allocation is checked by
//! enumerating removal subsets as bitmasks, and existence by scanning all
//! `n^m` assignment vectors in lexicographic order (item 0 is the most
//! significant digit). The faster implementations are tested against these.
//!
//! Budgets turn over-large searches into errors instead of wrong or slow
//! answers. The scan can optionally be split across worker threads; the
//! reported witness is still the lexicographically first one, because
//! workers own contiguous index ranges and the lowest-range hit wins.

use crate::instance::{Allocation, FairnessQuery, Instance, Notion};
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    /// Cap on assignment vectors scanned by [`oracle_exists`].
    pub max_allocations: u64,
    /// Cap on removal subsets per ordered pair, i.e. on `2^bundle`.
    pub max_subsets_per_pair: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_allocations: 20_000_000, max_subsets_per_pair: 1 << 20 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    /// Worker threads for the existence scan.
    pub workers: usize,
    /// Fix item 0 to agent 0. Sound only for identical valuations, where
    /// fairness is invariant under permuting bundles. Off by default.
    pub symmetry_reduction: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { workers: 1, symmetry_reduction: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    AllocationBudget { scanned: u64 },
    SubsetBudget { bundle_size: usize },
    SymmetryNeedsIdentical,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::AllocationBudget { scanned } => {
                write!(f, "allocation budget exhausted after scanning {scanned}")
            }
            OracleError::SubsetBudget { bundle_size } => {
                write!(f, "subset budget too small for a bundle of {bundle_size} items")
            }
            OracleError::SymmetryNeedsIdentical => {
                write!(f, "symmetry reduction requires identical valuations")
            }
        }
    }
}

impl std::error::Error for OracleError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleOutcome {
    /// Lexicographically first satisfying allocation, `None` when the scan
    /// proved none exists.
    pub found: Option<Allocation>,
    /// Assignment vectors fully checked.
    pub scanned: u64,
}

/// Exhaustively decides existence with default budgets and options.
pub fn oracle_exists(inst: &Instance, query: FairnessQuery) -> Result<OracleOutcome, OracleError> {
    oracle_exists_with(inst, query, &OracleBudget::default(), &OracleOptions::default())
}

pub fn oracle_exists_with(
    inst: &Instance,
    query: FairnessQuery,
    budget: &OracleBudget,
    options: &OracleOptions,
) -> Result<OracleOutcome, OracleError> {
    if options.symmetry_reduction && !inst.is_identical() {
        return Err(OracleError::SymmetryNeedsIdentical);
    }
    let (n, m) = (inst.agents(), inst.items());
    // with symmetry on, item 0 is pinned to agent 0 and only the remaining
    // m-1 digits are scanned
    let free = if options.symmetry_reduction && m > 0 { m - 1 } else { m };
    let total: u128 = (n as u128).pow(u32::try_from(free).unwrap_or(u32::MAX));
    let workers = options.workers.max(1);

    let scanned = AtomicU64::new(0);
    let over_budget = AtomicBool::new(false);
    let subset_problem: Mutex<Option<OracleError>> = Mutex::new(None);
    // (global index, winning bundles); lower index wins
    let best: Mutex<Option<(u128, Vec<Vec<usize>>)>> = Mutex::new(None);

    let chunk = total.div_ceil(workers as u128).max(1);
    std::thread::scope(|scope| {
        for w in 0..workers {
            let start = chunk.saturating_mul(w as u128);
            if start >= total {
                break;
            }
            let end = (start + chunk).min(total);
            let scanned = &scanned;
            let over_budget = &over_budget;
            let subset_problem = &subset_problem;
            let best = &best;
            scope.spawn(move || {
                let mut digits = decode(start, n, free);
                let mut idx = start;
                while idx < end {
                    if over_budget.load(Ordering::Relaxed) {
                        return;
                    }
                    if idx.trailing_zeros() >= 10 {
                        // someone earlier in the order already won
                        if let Some((b, _)) = best.lock().unwrap().as_ref() {
                            if *b < start {
                                return;
                            }
                        }
                    }
                    let so_far = scanned.fetch_add(1, Ordering::Relaxed) + 1;
                    if so_far > budget.max_allocations {
                        over_budget.store(true, Ordering::Relaxed);
                        return;
                    }
                    let bundles = bundles_of(&digits, n, options.symmetry_reduction && m > 0);
                    let ok = match query.notion {
                        Notion::Weak => weak_ok(inst, &bundles, query.c, budget),
                        Notion::Strong => strong_ok(inst, &bundles, query.c, budget),
                    };
                    match ok {
                        Ok(true) => {
                            let mut guard = best.lock().unwrap();
                            let replace = match guard.as_ref() {
                                None => true,
                                Some((b, _)) => idx < *b,
                            };
                            if replace {
                                *guard = Some((idx, bundles));
                            }
                            return;
                        }
                        Ok(false) => {}
                        Err(e) => {
                            let mut guard = subset_problem.lock().unwrap();
                            if guard.is_none() {
                                *guard = Some(e);
                            }
                            over_budget.store(true, Ordering::Relaxed);
                            return;
                        }
                    }
                    idx += 1;
                    if !next_assignment(&mut digits, n) {
                        break;
                    }
                }
            });
        }
    });

    if let Some(e) = subset_problem.into_inner().unwrap() {
        return Err(e);
    }
    let scanned_total = scanned.into_inner();
    let best = best.into_inner().unwrap();
    if let Some((_, bundles)) = best {
        return Ok(OracleOutcome { found: Some(Allocation::new(bundles)), scanned: scanned_total });
    }
    if over_budget.into_inner() {
        return Err(OracleError::AllocationBudget { scanned: scanned_total });
    }
    Ok(OracleOutcome { found: None, scanned: scanned_total })
}

/// Subset-enumeration check of the weak notion: every ordered pair and
/// dimension independently admits a removal set within the budget.
pub fn oracle_verify_weak(inst: &Instance, alloc: &Allocation, c: usize) -> Result<bool, OracleError> {
    weak_ok(inst, alloc.bundles(), c, &OracleBudget::default())
}

pub fn oracle_verify_weak_with(
    inst: &Instance,
    alloc: &Allocation,
    c: usize,
    budget: &OracleBudget,
) -> Result<bool, OracleError> {
    weak_ok(inst, alloc.bundles(), c, budget)
}

/// Subset-enumeration check of the strong notion: every ordered pair admits
/// one removal set that clears all dimensions at once.
pub fn oracle_verify_strong(
    inst: &Instance,
    alloc: &Allocation,
    c: usize,
) -> Result<bool, OracleError> {
    strong_ok(inst, alloc.bundles(), c, &OracleBudget::default())
}

pub fn oracle_verify_strong_with(
    inst: &Instance,
    alloc: &Allocation,
    c: usize,
    budget: &OracleBudget,
) -> Result<bool, OracleError> {
    strong_ok(inst, alloc.bundles(), c, budget)
}

fn decode(mut idx: u128, n: usize, digits: usize) -> Vec<usize> {
    let mut out = vec![0usize; digits];
    for slot in out.iter_mut().rev() {
        *slot = (idx % n as u128) as usize;
        idx /= n as u128;
    }
    out
}

/// Advances the assignment vector in lexicographic order (last digit
/// fastest); false on wrap-around.
fn next_assignment(digits: &mut [usize], n: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < n {
            return true;
        }
        *d = 0;
    }
    false
}

fn bundles_of(digits: &[usize], n: usize, pinned_first: bool) -> Vec<Vec<usize>> {
    let mut bundles = vec![Vec::new(); n];
    let mut item = 0usize;
    if pinned_first {
        bundles[0].push(0);
        item = 1;
    }
    for &agent in digits {
        bundles[agent].push(item);
        item += 1;
    }
    bundles
}

fn bundle_total(inst: &Instance, agent: usize, bundle: &[usize], dim: usize) -> u64 {
    bundle.iter().map(|&j| inst.value(agent, j, dim)).sum()
}

fn check_subset_budget(bundle: &[usize], budget: &OracleBudget) -> Result<(), OracleError> {
    let needed = 1u128 << bundle.len().min(127);
    if needed > budget.max_subsets_per_pair as u128 {
        return Err(OracleError::SubsetBudget { bundle_size: bundle.len() });
    }
    Ok(())
}

fn weak_ok(
    inst: &Instance,
    bundles: &[Vec<usize>],
    c: usize,
    budget: &OracleBudget,
) -> Result<bool, OracleError> {
    let n = inst.agents();
    for i in 0..n {
        for i2 in 0..n {
            if i == i2 {
                continue;
            }
            let envied = &bundles[i2];
            for k in 0..inst.dims() {
                let own = bundle_total(inst, i, &bundles[i], k);
                let envied_total = bundle_total(inst, i, envied, k);
                if own >= envied_total {
                    continue;
                }
                check_subset_budget(envied, budget)?;
                let mut ok = false;
                for mask in 0u64..(1u64 << envied.len()) {
                    if mask.count_ones() as usize > c {
                        continue;
                    }
                    let mut removed = 0u64;
                    for (b, &j) in envied.iter().enumerate() {
                        if mask & (1 << b) != 0 {
                            removed += inst.value(i, j, k);
                        }
                    }
                    if own >= envied_total - removed.min(envied_total) {
                        ok = true;
                        break;
                    }
                }
                if !ok {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn strong_ok(
    inst: &Instance,
    bundles: &[Vec<usize>],
    c: usize,
    budget: &OracleBudget,
) -> Result<bool, OracleError> {
    let n = inst.agents();
    let dims = inst.dims();
    for i in 0..n {
        for i2 in 0..n {
            if i == i2 {
                continue;
            }
            let envied = &bundles[i2];
            let own: Vec<u64> = (0..dims).map(|k| bundle_total(inst, i, &bundles[i], k)).collect();
            let envied_totals: Vec<u64> =
                (0..dims).map(|k| bundle_total(inst, i, envied, k)).collect();
            if (0..dims).all(|k| own[k] >= envied_totals[k]) {
                continue;
            }
            check_subset_budget(envied, budget)?;
            let mut ok = false;
            'masks: for mask in 0u64..(1u64 << envied.len()) {
                if mask.count_ones() as usize > c {
                    continue;
                }
                for k in 0..dims {
                    let mut removed = 0u64;
                    for (b, &j) in envied.iter().enumerate() {
                        if mask & (1 << b) != 0 {
                            removed += inst.value(i, j, k);
                        }
                    }
                    if own[k] < envied_totals[k] - removed.min(envied_totals[k]) {
                        continue 'masks;
                    }
                }
                ok = true;
                break;
            }
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_dim_binary() -> Instance {
        Instance::identical(2, 3, vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]).unwrap()
    }

    fn skewed_pair() -> Instance {
        Instance::identical(2, 2, vec![vec![1, 1], vec![2, 0], vec![0, 2]]).unwrap()
    }

    #[test]
    fn lexicographically_first_witness_is_frozen() {
        // the first assignment vector satisfying weak sEF1 here is (0,1,1)
        let inst = skewed_pair();
        let out = oracle_exists(&inst, FairnessQuery::weak(1)).unwrap();
        let alloc = out.found.unwrap();
        assert_eq!(alloc.bundles(), &[vec![0], vec![1, 2]]);
        // (0,0,0), (0,0,1), (0,1,0) and the scan stops inside (0,1,1)
        assert_eq!(out.scanned, 4);
    }

    #[test]
    fn exhaustion_proves_nonexistence() {
        let inst = three_dim_binary();
        let weak = oracle_exists(&inst, FairnessQuery::weak(1)).unwrap();
        assert_eq!(weak.found, None);
        assert_eq!(weak.scanned, 8);
        let strong = oracle_exists(&inst, FairnessQuery::strong(1)).unwrap();
        assert_eq!(strong.found, None);

        let ok = oracle_exists(&inst, FairnessQuery::weak(2)).unwrap();
        assert!(ok.found.is_some());
    }

    #[test]
    fn strong_verifier_agrees_with_single_allocation_checks() {
        let inst = skewed_pair();
        let split = Allocation::new(vec![vec![0], vec![1, 2]]);
        assert!(!oracle_verify_strong(&inst, &split, 1).unwrap());
        assert!(oracle_verify_strong(&inst, &split, 2).unwrap());
        assert!(oracle_verify_weak(&inst, &split, 1).unwrap());
        assert!(!oracle_verify_weak(&inst, &split, 0).unwrap());
    }

    #[test]
    fn allocation_budget_is_an_error_not_an_answer() {
        let inst = three_dim_binary();
        let tight = OracleBudget { max_allocations: 3, ..OracleBudget::default() };
        let r = oracle_exists_with(
            &inst,
            FairnessQuery::weak(1),
            &tight,
            &OracleOptions::default(),
        );
        assert_eq!(r, Err(OracleError::AllocationBudget { scanned: 4 }));
    }

    #[test]
    fn subset_budget_is_checked_before_scanning() {
        let inst = Instance::identical(2, 1, (0..12).map(|_| vec![1]).collect()).unwrap();
        let all_to_one = Allocation::new(vec![(0..12).collect(), vec![]]);
        let tiny = OracleBudget { max_subsets_per_pair: 16, ..OracleBudget::default() };
        let r = weak_ok(&inst, all_to_one.bundles(), 1, &tiny);
        assert_eq!(r, Err(OracleError::SubsetBudget { bundle_size: 12 }));
    }

    #[test]
    fn worker_split_does_not_change_the_answer() {
        for (inst, query) in [
            (three_dim_binary(), FairnessQuery::weak(1)),
            (three_dim_binary(), FairnessQuery::weak(2)),
            (skewed_pair(), FairnessQuery::strong(1)),
            (skewed_pair(), FairnessQuery::weak(1)),
        ] {
            let solo = oracle_exists(&inst, query).unwrap();
            for workers in [2, 3, 7] {
                let opts = OracleOptions { workers, symmetry_reduction: false };
                let multi =
                    oracle_exists_with(&inst, query, &OracleBudget::default(), &opts).unwrap();
                assert_eq!(solo.found, multi.found, "workers={workers}");
            }
        }
    }

    #[test]
    fn symmetry_reduction_preserves_the_boolean_answer() {
        let opts = OracleOptions { workers: 1, symmetry_reduction: true };
        for c in 0..=2usize {
            for inst in [three_dim_binary(), skewed_pair()] {
                for query in [FairnessQuery::weak(c), FairnessQuery::strong(c)] {
                    let plain = oracle_exists(&inst, query).unwrap();
                    let reduced =
                        oracle_exists_with(&inst, query, &OracleBudget::default(), &opts).unwrap();
                    assert_eq!(plain.found.is_some(), reduced.found.is_some());
                    assert!(reduced.scanned <= plain.scanned.max(1));
                }
            }
        }
        let unequal = Instance::new(
            1,
            vec![vec![vec![1], vec![0]], vec![vec![0], vec![1]]],
        )
        .unwrap();
        assert_eq!(
            oracle_exists_with(
                &unequal,
                FairnessQuery::weak(0),
                &OracleBudget::default(),
                &opts
            ),
            Err(OracleError::SymmetryNeedsIdentical)
        );
    }

    #[test]
    fn empty_and_single_agent_instances() {
        let empty = Instance::identical(2, 1, vec![]).unwrap();
        let out = oracle_exists(&empty, FairnessQuery::strong(0)).unwrap();
        assert_eq!(out.found.unwrap().bundles(), &[vec![], vec![]]);
        assert_eq!(out.scanned, 1);

        let solo = Instance::identical(1, 1, vec![vec![7], vec![9]]).unwrap();
        let out = oracle_exists(&solo, FairnessQuery::weak(0)).unwrap();
        assert_eq!(out.found.unwrap().bundles(), &[vec![0, 1]]);
    }
}
