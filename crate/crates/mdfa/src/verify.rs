//! Envy verification with bounded removals.
//!
//! An allocation satisfies the weak notion at removal budget `c` when, for
//! every ordered agent pair (i, i') and every dimension k, some set X of at
//! most c items from i''s bundle has `v_i(A_i)_k >= v_i(A_i' \ X)_k`; X may
//! differ across dimensions. The strong notion requires a single X per pair
//! that works in every dimension at once.
//!
//! The weak check is a per-dimension greedy: removing the c highest-valued
//! items of the envied bundle is optimal, so each (pair, dimension) reduces
//! to one comparison. The strong check is an exact branch-and-bound over
//! subsets of the envied bundle: dimensions whose deficit cannot be covered
//! even by the c globally largest values prune immediately, and partial
//! choices are pruned against per-dimension suffix sums and top-of-budget
//! sums. The search is budgeted by a node cap; exhausting it is reported as
//! an error, never as a verdict.

use crate::instance::{Allocation, Instance, InstanceError};
use std::fmt;

/// Resource bounds for the strong-side subset searches.
#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    /// Maximum branch-and-bound nodes across all pairs of one call.
    pub node_budget: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { node_budget: 10_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyError {
    Instance(InstanceError),
    /// The subset search exceeded its node budget; the query is undecided.
    NodeBudgetExceeded { visited: u64 },
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Instance(e) => write!(f, "{e}"),
            VerifyError::NodeBudgetExceeded { visited } => {
                write!(f, "subset search exceeded its node budget after {visited} nodes")
            }
        }
    }
}

impl std::error::Error for VerifyError {}

impl From<InstanceError> for VerifyError {
    fn from(e: InstanceError) -> Self {
        VerifyError::Instance(e)
    }
}

/// Removal sets proving that an allocation satisfies a query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// One entry per (envier, envied, dimension).
    Weak(Vec<WeakWitnessEntry>),
    /// One entry per (envier, envied).
    Strong(Vec<StrongWitnessEntry>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakWitnessEntry {
    pub envier: usize,
    pub envied: usize,
    pub dim: usize,
    /// Removed items, ascending.
    pub removed: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrongWitnessEntry {
    pub envier: usize,
    pub envied: usize,
    pub removed: Vec<usize>,
}

impl Witness {
    /// Replays the recorded removal sets against the definitions: every
    /// ordered pair (and dimension, for the weak notion) must be covered by
    /// an entry whose removal set lies in the envied bundle, has at most `c`
    /// items, and clears the envy.
    pub fn replay(&self, inst: &Instance, alloc: &Allocation, c: usize) -> Result<bool, InstanceError> {
        inst.check_allocation(alloc)?;
        let n = inst.agents();
        match self {
            Witness::Weak(entries) => {
                let mut covered = vec![false; n * n * inst.dims()];
                for e in entries {
                    if e.envier >= n || e.envied >= n || e.envier == e.envied || e.dim >= inst.dims() {
                        return Ok(false);
                    }
                    if !removal_ok(inst, alloc, e.envier, e.envied, &e.removed, c, Some(e.dim))? {
                        return Ok(false);
                    }
                    covered[(e.envier * n + e.envied) * inst.dims() + e.dim] = true;
                }
                Ok(all_pairs_covered(&covered, n, inst.dims()))
            }
            Witness::Strong(entries) => {
                let mut covered = vec![false; n * n];
                for e in entries {
                    if e.envier >= n || e.envied >= n || e.envier == e.envied {
                        return Ok(false);
                    }
                    if !removal_ok(inst, alloc, e.envier, e.envied, &e.removed, c, None)? {
                        return Ok(false);
                    }
                    covered[e.envier * n + e.envied] = true;
                }
                Ok(all_pairs_covered(&covered, n, 1))
            }
        }
    }
}

fn all_pairs_covered(covered: &[bool], n: usize, per_pair: usize) -> bool {
    for i in 0..n {
        for ip in 0..n {
            if i == ip {
                continue;
            }
            for k in 0..per_pair {
                if !covered[(i * n + ip) * per_pair + k] {
                    return false;
                }
            }
        }
    }
    true
}

/// Checks one removal set against Def. 1 (some dimension) or Def. 2 (all
/// dimensions, `dim == None`).
fn removal_ok(
    inst: &Instance,
    alloc: &Allocation,
    envier: usize,
    envied: usize,
    removed: &[usize],
    c: usize,
    dim: Option<usize>,
) -> Result<bool, InstanceError> {
    if removed.len() > c {
        return Ok(false);
    }
    let bundle = alloc.bundle(envied);
    if !removed.iter().all(|x| bundle.contains(x)) {
        return Ok(false);
    }
    let dims: Vec<usize> = match dim {
        Some(k) => vec![k],
        None => (0..inst.dims()).collect(),
    };
    for k in dims {
        let own = inst.bundle_value(envier, alloc.bundle(envier), k)?;
        let other = inst.bundle_value(envier, bundle, k)?;
        let cleared = inst.bundle_value(envier, removed, k)?;
        if own + cleared < other {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A (pair, dimension) where even removing the `c` highest values leaves
/// envy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakViolation {
    pub envier: usize,
    pub envied: usize,
    pub dim: usize,
    pub own_value: u64,
    pub envied_value: u64,
    /// Sum of the `min(c, bundle)` highest removable values.
    pub best_removable: u64,
}

/// A pair for which no single removal set of size at most `c` clears every
/// dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrongViolation {
    pub envier: usize,
    pub envied: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureReport {
    Weak(Vec<WeakViolation>),
    Strong(Vec<StrongViolation>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyOutcome {
    Satisfied(Witness),
    Violated(FailureReport),
}

/// Outcome plus resource counters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub outcome: VerifyOutcome,
    /// Branch-and-bound nodes visited (0 for weak checks).
    pub nodes_visited: u64,
}

impl Verification {
    pub fn satisfied(&self) -> bool {
        matches!(self.outcome, VerifyOutcome::Satisfied(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.outcome {
            VerifyOutcome::Satisfied(w) => Some(w),
            VerifyOutcome::Violated(_) => None,
        }
    }

    pub fn failure(&self) -> Option<&FailureReport> {
        match &self.outcome {
            VerifyOutcome::Satisfied(_) => None,
            VerifyOutcome::Violated(r) => Some(r),
        }
    }
}

/// Weak check: for each (envier, envied, dimension) compare against the
/// envied bundle minus its `c` highest values in that dimension (ties broken
/// toward the lowest item index).
pub fn verify_weak(inst: &Instance, alloc: &Allocation, c: usize) -> Result<Verification, VerifyError> {
    inst.check_allocation(alloc)?;
    let n = inst.agents();
    let mut entries = Vec::new();
    let mut violations = Vec::new();
    for envier in 0..n {
        for envied in 0..n {
            if envier == envied {
                continue;
            }
            let bundle = alloc.bundle(envied);
            for dim in 0..inst.dims() {
                let own = inst.bundle_value(envier, alloc.bundle(envier), dim)?;
                let envied_value = inst.bundle_value(envier, bundle, dim)?;
                let removed = top_values(inst, envier, bundle, dim, c);
                let best_removable = inst.bundle_value(envier, &removed, dim)?;
                if own + best_removable >= envied_value {
                    entries.push(WeakWitnessEntry { envier, envied, dim, removed });
                } else {
                    violations.push(WeakViolation {
                        envier,
                        envied,
                        dim,
                        own_value: own,
                        envied_value,
                        best_removable,
                    });
                }
            }
        }
    }
    let outcome = if violations.is_empty() {
        VerifyOutcome::Satisfied(Witness::Weak(entries))
    } else {
        VerifyOutcome::Violated(FailureReport::Weak(violations))
    };
    Ok(Verification { outcome, nodes_visited: 0 })
}

/// The `min(c, |bundle|)` items of `bundle` with the highest values for
/// `agent` in `dim`, ties toward the lowest item index; returned ascending.
fn top_values(inst: &Instance, agent: usize, bundle: &[usize], dim: usize, c: usize) -> Vec<usize> {
    let mut ranked: Vec<usize> = bundle.to_vec();
    // bundle is ascending, so a stable sort by descending value breaks ties
    // toward the lowest index
    ranked.sort_by_key(|&j| std::cmp::Reverse(inst.value(agent, j, dim)));
    ranked.truncate(c.min(bundle.len()));
    ranked.sort_unstable();
    ranked
}

/// Strong check with default limits.
pub fn verify_strong(inst: &Instance, alloc: &Allocation, c: usize) -> Result<Verification, VerifyError> {
    verify_strong_with(inst, alloc, c, &SearchLimits::default())
}

/// Strong check: per ordered pair, search for one removal set clearing every
/// dimension. Pairs are processed in order of increasing envied-bundle size
/// so cheap refutations come first; the node budget is shared across pairs.
pub fn verify_strong_with(
    inst: &Instance,
    alloc: &Allocation,
    c: usize,
    limits: &SearchLimits,
) -> Result<Verification, VerifyError> {
    inst.check_allocation(alloc)?;
    let n = inst.agents();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for envier in 0..n {
        for envied in 0..n {
            if envier != envied {
                pairs.push((envier, envied));
            }
        }
    }
    pairs.sort_by_key(|&(envier, envied)| (alloc.bundle(envied).len(), envier, envied));

    let mut nodes = 0u64;
    let mut entries = Vec::new();
    let mut violations = Vec::new();
    for (envier, envied) in pairs {
        match pair_removal_set(inst, alloc, envier, envied, c, &mut nodes, limits.node_budget)? {
            Some(removed) => entries.push(StrongWitnessEntry { envier, envied, removed }),
            None => violations.push(StrongViolation { envier, envied }),
        }
    }
    entries.sort_by_key(|e| (e.envier, e.envied));
    violations.sort_by_key(|v| (v.envier, v.envied));
    let outcome = if violations.is_empty() {
        VerifyOutcome::Satisfied(Witness::Strong(entries))
    } else {
        VerifyOutcome::Violated(FailureReport::Strong(violations))
    };
    Ok(Verification { outcome, nodes_visited: nodes })
}

/// Smallest removal-set size that clears every dimension of `envier`'s envy
/// toward `envied`, by iterative deepening on the shared search. Always at
/// most the envied bundle's size; equals 0 exactly when there is no envy.
pub fn min_removal_size(
    inst: &Instance,
    alloc: &Allocation,
    envier: usize,
    envied: usize,
) -> Result<usize, VerifyError> {
    min_removal_size_with(inst, alloc, envier, envied, &SearchLimits::default())
}

pub fn min_removal_size_with(
    inst: &Instance,
    alloc: &Allocation,
    envier: usize,
    envied: usize,
    limits: &SearchLimits,
) -> Result<usize, VerifyError> {
    inst.check_allocation(alloc)?;
    if envier >= inst.agents() {
        return Err(InstanceError::AgentOutOfRange { agent: envier, agents: inst.agents() }.into());
    }
    if envied >= inst.agents() || envier == envied {
        return Err(InstanceError::AgentOutOfRange { agent: envied, agents: inst.agents() }.into());
    }
    let mut nodes = 0u64;
    for size in 0..=alloc.bundle(envied).len() {
        if pair_removal_set(inst, alloc, envier, envied, size, &mut nodes, limits.node_budget)?.is_some() {
            return Ok(size);
        }
    }
    unreachable!("removing the whole bundle always clears envy");
}

/// Finds a removal set of at most `c` items from `envied`'s bundle clearing
/// `envier`'s envy in every dimension, or proves none exists.
fn pair_removal_set(
    inst: &Instance,
    alloc: &Allocation,
    envier: usize,
    envied: usize,
    c: usize,
    nodes: &mut u64,
    node_cap: u64,
) -> Result<Option<Vec<usize>>, VerifyError> {
    let bundle = alloc.bundle(envied);
    // deficits in the dimensions where envy actually exists
    let mut dims = Vec::new();
    let mut deficits = Vec::new();
    for k in 0..inst.dims() {
        let own = inst.bundle_value(envier, alloc.bundle(envier), k)?;
        let other = inst.bundle_value(envier, bundle, k)?;
        if other > own {
            dims.push(k);
            deficits.push(other - own);
        }
    }
    if dims.is_empty() {
        return Ok(Some(Vec::new()));
    }
    if c == 0 {
        return Ok(None);
    }
    let candidates: Vec<(usize, Vec<u64>)> = bundle
        .iter()
        .map(|&j| (j, dims.iter().map(|&k| inst.value(envier, j, k)).collect()))
        .collect();
    match cover_search(&candidates, &deficits, c, nodes, node_cap) {
        Ok(found) => Ok(found),
        Err(CoverBudget) => Err(VerifyError::NodeBudgetExceeded { visited: *nodes }),
    }
}

/// Marker for an exhausted cover-search node budget.
pub(crate) struct CoverBudget;

/// Exact search for a subset of `candidates` of size at most `budget` whose
/// value vectors cover `deficits` in every coordinate. Candidates are
/// branched in descending order of their largest coordinate (ties toward the
/// lowest item index), include-first, so witnesses surface early; pruning
/// uses per-coordinate suffix sums and the sum of the `b` largest values
/// still allowed by the remaining budget. Returns the chosen item indices in
/// ascending order.
pub(crate) fn cover_search(
    candidates: &[(usize, Vec<u64>)],
    deficits: &[u64],
    budget: usize,
    nodes: &mut u64,
    node_cap: u64,
) -> Result<Option<Vec<usize>>, CoverBudget> {
    let d = deficits.len();
    debug_assert!(candidates.iter().all(|(_, v)| v.len() == d));
    let budget = budget.min(candidates.len());

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&p| {
        let max = candidates[p].1.iter().copied().max().unwrap_or(0);
        (std::cmp::Reverse(max), candidates[p].0)
    });

    // suffix[p][k]: total value in coordinate k from position p onward
    let mut suffix = vec![vec![0u64; d]; order.len() + 1];
    for p in (0..order.len()).rev() {
        for k in 0..d {
            suffix[p][k] = suffix[p + 1][k] + candidates[order[p]].1[k];
        }
    }
    // top_sum[k][b]: sum of the b largest values in coordinate k (over all
    // candidates; an upper bound for any b remaining items)
    let mut top_sum = vec![vec![0u64; budget + 1]; d];
    for k in 0..d {
        let mut vals: Vec<u64> = candidates.iter().map(|(_, v)| v[k]).collect();
        vals.sort_unstable_by(|a, b| b.cmp(a));
        for b in 1..=budget {
            top_sum[k][b] = top_sum[k][b - 1] + vals.get(b - 1).copied().unwrap_or(0);
        }
    }

    struct Dfs<'a> {
        candidates: &'a [(usize, Vec<u64>)],
        order: &'a [usize],
        deficits: &'a [u64],
        suffix: &'a [Vec<u64>],
        top_sum: &'a [Vec<u64>],
        budget: usize,
        nodes: &'a mut u64,
        node_cap: u64,
    }

    impl Dfs<'_> {
        fn run(
            &mut self,
            pos: usize,
            chosen: &mut Vec<usize>,
            covered: &mut [u64],
        ) -> Result<Option<Vec<usize>>, CoverBudget> {
            *self.nodes += 1;
            if *self.nodes > self.node_cap {
                return Err(CoverBudget);
            }
            if covered
                .iter()
                .zip(self.deficits)
                .all(|(got, need)| got >= need)
            {
                let mut items: Vec<usize> =
                    chosen.iter().map(|&p| self.candidates[self.order[p]].0).collect();
                items.sort_unstable();
                return Ok(Some(items));
            }
            if pos == self.order.len() {
                return Ok(None);
            }
            let left = self.budget - chosen.len();
            for (k, (&got, &need)) in covered.iter().zip(self.deficits).enumerate() {
                if got >= need {
                    continue;
                }
                let gap = need - got;
                if self.suffix[pos][k] < gap || self.top_sum[k][left] < gap {
                    return Ok(None);
                }
            }
            if chosen.len() < self.budget {
                chosen.push(pos);
                for (k, v) in covered.iter_mut().enumerate() {
                    *v += self.candidates[self.order[pos]].1[k];
                }
                let found = self.run(pos + 1, chosen, covered)?;
                for (k, v) in covered.iter_mut().enumerate() {
                    *v -= self.candidates[self.order[pos]].1[k];
                }
                chosen.pop();
                if let Some(items) = found {
                    return Ok(Some(items));
                }
            }
            self.run(pos + 1, chosen, covered)
        }
    }

    let mut dfs = Dfs {
        candidates,
        order: &order,
        deficits,
        suffix: &suffix,
        top_sum: &top_sum,
        budget,
        nodes,
        node_cap,
    };
    dfs.run(0, &mut Vec::new(), &mut vec![0u64; d])
}
