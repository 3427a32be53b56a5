//! Problem model: agents, items, additive multi-dimensional valuations, and
//! discrete allocations.
//!
//! An instance has `n` agents, `m` items, and `l` valuation dimensions.
//! `value(i, j, k)` is agent `i`'s nonnegative integer value for item `j` in
//! dimension `k`, and bundle values add up coordinate-wise per dimension.

use std::fmt;

/// Fairness notion being queried.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Notion {
    /// Per ordered agent pair and per dimension, some removal set of at most
    /// `c` items clears the envy; the set may differ across dimensions.
    Weak,
    /// Per ordered agent pair, a single removal set of at most `c` items
    /// clears the envy in every dimension simultaneously.
    Strong,
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Notion::Weak => write!(f, "weak"),
            Notion::Strong => write!(f, "strong"),
        }
    }
}

/// A notion together with its removal budget `c`. `c` larger than the item
/// count is allowed; removals are capped by bundle size anyway.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FairnessQuery {
    pub notion: Notion,
    pub c: usize,
}

impl FairnessQuery {
    pub fn weak(c: usize) -> Self {
        FairnessQuery { notion: Notion::Weak, c }
    }
    pub fn strong(c: usize) -> Self {
        FairnessQuery { notion: Notion::Strong, c }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceError {
    NoAgents,
    NoDimensions,
    ShapeMismatch { detail: String },
    AgentOutOfRange { agent: usize, agents: usize },
    ItemOutOfRange { item: usize, items: usize },
    DimensionOutOfRange { dim: usize, dims: usize },
    DuplicateItem { item: usize },
    WrongBundleCount { expected: usize, got: usize },
    NotAPartition { detail: String },
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::NoAgents => write!(f, "instance must have at least one agent"),
            InstanceError::NoDimensions => write!(f, "instance must have at least one dimension"),
            InstanceError::ShapeMismatch { detail } => write!(f, "valuation shape mismatch: {detail}"),
            InstanceError::AgentOutOfRange { agent, agents } => {
                write!(f, "agent index {agent} out of range (instance has {agents})")
            }
            InstanceError::ItemOutOfRange { item, items } => {
                write!(f, "item index {item} out of range (instance has {items})")
            }
            InstanceError::DimensionOutOfRange { dim, dims } => {
                write!(f, "dimension index {dim} out of range (instance has {dims})")
            }
            InstanceError::DuplicateItem { item } => {
                write!(f, "item {item} listed more than once")
            }
            InstanceError::WrongBundleCount { expected, got } => {
                write!(f, "allocation has {got} bundles but the instance has {expected} agents")
            }
            InstanceError::NotAPartition { detail } => {
                write!(f, "allocation is not a partition of the items: {detail}")
            }
        }
    }
}

impl std::error::Error for InstanceError {}

/// A fair-division instance with additive integer valuations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    agents: usize,
    items: usize,
    dims: usize,
    /// Row-major `[agent][item][dim]`.
    values: Vec<u64>,
    /// True when all agents share one valuation matrix; computed, not trusted.
    identical: bool,
    v_max: u64,
    item_names: Option<Vec<String>>,
}

impl Instance {
    /// Builds an instance from per-agent valuation matrices
    /// (`per_agent[i][j][k]`). `dims` must be given explicitly so that
    /// zero-item instances still know their dimension count.
    pub fn new(dims: usize, per_agent: Vec<Vec<Vec<u64>>>) -> Result<Self, InstanceError> {
        if per_agent.is_empty() {
            return Err(InstanceError::NoAgents);
        }
        if dims == 0 {
            return Err(InstanceError::NoDimensions);
        }
        let agents = per_agent.len();
        let items = per_agent[0].len();
        let mut values = Vec::with_capacity(agents * items * dims);
        for (i, matrix) in per_agent.iter().enumerate() {
            if matrix.len() != items {
                return Err(InstanceError::ShapeMismatch {
                    detail: format!(
                        "agent {i} values {} items, agent 0 values {items}",
                        matrix.len()
                    ),
                });
            }
            for (j, row) in matrix.iter().enumerate() {
                if row.len() != dims {
                    return Err(InstanceError::ShapeMismatch {
                        detail: format!(
                            "agent {i}, item {j} has {} dimensions, expected {dims}",
                            row.len()
                        ),
                    });
                }
                values.extend_from_slice(row);
            }
        }
        let identical = per_agent.iter().all(|m| *m == per_agent[0]);
        let v_max = values.iter().copied().max().unwrap_or(0);
        Ok(Instance {
            agents,
            items,
            dims,
            values,
            identical,
            v_max,
            item_names: None,
        })
    }

    /// Builds an identical-valuation instance from one shared matrix
    /// (`matrix[j][k]`).
    pub fn identical(agents: usize, dims: usize, matrix: Vec<Vec<u64>>) -> Result<Self, InstanceError> {
        if agents == 0 {
            return Err(InstanceError::NoAgents);
        }
        Instance::new(dims, vec![matrix; agents])
    }

    /// Attaches display names for the items (length must equal the item
    /// count).
    pub fn with_item_names(mut self, names: Vec<String>) -> Result<Self, InstanceError> {
        if names.len() != self.items {
            return Err(InstanceError::ShapeMismatch {
                detail: format!("{} item names for {} items", names.len(), self.items),
            });
        }
        self.item_names = Some(names);
        Ok(self)
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn is_identical(&self) -> bool {
        self.identical
    }

    /// Largest single valuation entry (0 for zero-item instances).
    pub fn v_max(&self) -> u64 {
        self.v_max
    }

    pub fn item_names(&self) -> Option<&[String]> {
        self.item_names.as_deref()
    }

    /// Agent `i`'s value for item `j` in dimension `k`. Panics on
    /// out-of-range indices, like slice indexing.
    #[inline]
    pub fn value(&self, agent: usize, item: usize, dim: usize) -> u64 {
        assert!(agent < self.agents && item < self.items && dim < self.dims);
        self.values[(agent * self.items + item) * self.dims + dim]
    }

    /// `v_i(S)_k`: agent `agent`'s value for the bundle in dimension `dim`.
    pub fn bundle_value(&self, agent: usize, bundle: &[usize], dim: usize) -> Result<u64, InstanceError> {
        if agent >= self.agents {
            return Err(InstanceError::AgentOutOfRange { agent, agents: self.agents });
        }
        if dim >= self.dims {
            return Err(InstanceError::DimensionOutOfRange { dim, dims: self.dims });
        }
        let mut seen = vec![false; self.items];
        let mut total = 0u64;
        for &item in bundle {
            if item >= self.items {
                return Err(InstanceError::ItemOutOfRange { item, items: self.items });
            }
            if seen[item] {
                return Err(InstanceError::DuplicateItem { item });
            }
            seen[item] = true;
            total += self.value(agent, item, dim);
        }
        Ok(total)
    }

    /// Checks that `alloc` is a partition of all items into one bundle per
    /// agent.
    pub fn check_allocation(&self, alloc: &Allocation) -> Result<(), InstanceError> {
        if alloc.agents() != self.agents {
            return Err(InstanceError::WrongBundleCount {
                expected: self.agents,
                got: alloc.agents(),
            });
        }
        let mut owner = vec![None; self.items];
        for (i, bundle) in alloc.bundles().iter().enumerate() {
            for &item in bundle {
                if item >= self.items {
                    return Err(InstanceError::ItemOutOfRange { item, items: self.items });
                }
                if let Some(prev) = owner[item] {
                    return Err(InstanceError::NotAPartition {
                        detail: format!("item {item} appears in bundles {prev} and {i}"),
                    });
                }
                owner[item] = Some(i);
            }
        }
        if let Some(item) = owner.iter().position(Option::is_none) {
            return Err(InstanceError::NotAPartition {
                detail: format!("item {item} is unassigned"),
            });
        }
        Ok(())
    }
}

/// A partition of the items into one bundle per agent. Bundles are kept
/// sorted in ascending item order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Allocation {
    bundles: Vec<Vec<usize>>,
}

impl Allocation {
    pub fn new(mut bundles: Vec<Vec<usize>>) -> Self {
        for b in bundles.iter_mut() {
            b.sort_unstable();
        }
        Allocation { bundles }
    }

    /// Item `j` goes to agent `assignment[j]`.
    pub fn from_assignment(agents: usize, assignment: &[usize]) -> Self {
        let mut bundles = vec![Vec::new(); agents];
        for (item, &agent) in assignment.iter().enumerate() {
            bundles[agent].push(item);
        }
        Allocation { bundles }
    }

    /// Item `j` goes to agent `j mod n`; every bundle has at most
    /// `ceil(m / n)` items.
    pub fn round_robin(agents: usize, items: usize) -> Self {
        let mut bundles = vec![Vec::new(); agents];
        for item in 0..items {
            bundles[item % agents].push(item);
        }
        Allocation { bundles }
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> &[usize] {
        &self.bundles[agent]
    }

    /// Inverse of `from_assignment`; `items` is the instance's item count.
    /// Returns `None` if the allocation is not a partition of `0..items`.
    pub fn assignment(&self, items: usize) -> Option<Vec<usize>> {
        let mut assign = vec![usize::MAX; items];
        for (i, bundle) in self.bundles.iter().enumerate() {
            for &item in bundle {
                if item >= items || assign[item] != usize::MAX {
                    return None;
                }
                assign[item] = i;
            }
        }
        if assign.iter().any(|&a| a == usize::MAX) {
            return None;
        }
        Some(assign)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_dim_binary() -> Instance {
        // items g1=(1,1,0), g2=(1,0,1), g3=(0,1,1), two identical agents
        Instance::identical(
            2,
            3,
            vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]],
        )
        .unwrap()
    }

    fn skewed_pair() -> Instance {
        // items g1=(1,1), g2=(2,0), g3=(0,2), two identical agents
        Instance::identical(2, 2, vec![vec![1, 1], vec![2, 0], vec![0, 2]]).unwrap()
    }

    #[test]
    fn bundle_values_add_per_dimension() {
        let inst = three_dim_binary();
        // dimension 0 over {g1, g2}
        assert_eq!(inst.bundle_value(0, &[0, 1], 0).unwrap(), 2);
        let skew = skewed_pair();
        // dimension 1 over {g2, g3}
        assert_eq!(skew.bundle_value(0, &[1, 2], 1).unwrap(), 2);
        // empty bundle
        assert_eq!(skew.bundle_value(1, &[], 0).unwrap(), 0);
    }

    #[test]
    fn bundle_value_rejects_bad_indices() {
        let inst = skewed_pair();
        assert_eq!(
            inst.bundle_value(2, &[0], 0),
            Err(InstanceError::AgentOutOfRange { agent: 2, agents: 2 })
        );
        assert_eq!(
            inst.bundle_value(0, &[3], 0),
            Err(InstanceError::ItemOutOfRange { item: 3, items: 3 })
        );
        assert_eq!(
            inst.bundle_value(0, &[0], 2),
            Err(InstanceError::DimensionOutOfRange { dim: 2, dims: 2 })
        );
        assert_eq!(
            inst.bundle_value(0, &[1, 1], 0),
            Err(InstanceError::DuplicateItem { item: 1 })
        );
    }

    #[test]
    fn construction_validates_shapes() {
        assert_eq!(Instance::new(1, vec![]), Err(InstanceError::NoAgents));
        assert_eq!(
            Instance::new(0, vec![vec![vec![]]]),
            Err(InstanceError::NoDimensions)
        );
        assert!(matches!(
            Instance::new(2, vec![vec![vec![1, 2], vec![3]]]),
            Err(InstanceError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            Instance::new(1, vec![vec![vec![1]], vec![vec![1], vec![2]]]),
            Err(InstanceError::ShapeMismatch { .. })
        ));
        // zero items is fine as long as dims is explicit
        let empty = Instance::new(2, vec![vec![], vec![]]).unwrap();
        assert_eq!(empty.items(), 0);
        assert_eq!(empty.dims(), 2);
        assert_eq!(empty.v_max(), 0);
    }

    #[test]
    fn identical_flag_is_computed_not_trusted() {
        let same = Instance::new(1, vec![vec![vec![1], vec![2]], vec![vec![1], vec![2]]]).unwrap();
        assert!(same.is_identical());
        let diff = Instance::new(1, vec![vec![vec![1], vec![2]], vec![vec![1], vec![3]]]).unwrap();
        assert!(!diff.is_identical());
        // single agent is trivially identical
        assert!(Instance::new(1, vec![vec![vec![5]]]).unwrap().is_identical());
    }

    #[test]
    fn allocation_checks_partition() {
        let inst = skewed_pair();
        let ok = Allocation::new(vec![vec![0], vec![2, 1]]);
        assert_eq!(ok.bundle(1), &[1, 2]); // sorted on construction
        assert!(inst.check_allocation(&ok).is_ok());

        let wrong_count = Allocation::new(vec![vec![0, 1, 2]]);
        assert!(matches!(
            inst.check_allocation(&wrong_count),
            Err(InstanceError::WrongBundleCount { .. })
        ));
        let missing = Allocation::new(vec![vec![0], vec![1]]);
        assert!(matches!(
            inst.check_allocation(&missing),
            Err(InstanceError::NotAPartition { .. })
        ));
        let doubled = Allocation::new(vec![vec![0, 1], vec![1, 2]]);
        assert!(matches!(
            inst.check_allocation(&doubled),
            Err(InstanceError::NotAPartition { .. })
        ));
    }

    #[test]
    fn round_robin_sizes_are_balanced() {
        let rr = Allocation::round_robin(3, 10);
        assert_eq!(rr.bundle(0), &[0, 3, 6, 9]);
        assert_eq!(rr.bundle(1), &[1, 4, 7]);
        assert_eq!(rr.bundle(2), &[2, 5, 8]);
        let empty = Allocation::round_robin(2, 0);
        assert_eq!(empty.bundle(0), &[] as &[usize]);

        for n in 1..5usize {
            for m in 0..20usize {
                let rr = Allocation::round_robin(n, m);
                let cap = m.div_ceil(n);
                assert!(rr.bundles().iter().all(|b| b.len() <= cap));
            }
        }
    }

    #[test]
    fn assignment_roundtrip() {
        let a = Allocation::from_assignment(3, &[0, 1, 2, 0]);
        assert_eq!(a.assignment(4).unwrap(), vec![0, 1, 2, 0]);
        assert_eq!(a.assignment(5), None);
        let not_partition = Allocation::new(vec![vec![0], vec![0]]);
        assert_eq!(not_partition.assignment(1), None);
    }
}
