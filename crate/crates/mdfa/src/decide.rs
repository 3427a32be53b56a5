//! Exact existence deciders.
//!
//! Whether an allocation with a given fairness guarantee exists at all is
//! NP-hard in general, so these deciders are exponential in the worst case
//! but avoid enumerating allocations directly. Both share one observation:
//! when `m <= n * c` a round-robin deal is trivially fair, because every
//! bundle fits inside the removal budget; the interesting work starts above
//! that threshold.
//!
//! * [`exists_weak`] runs a layered dynamic program over items. A state
//!   after the first `j` items is the matrix of bundle values per
//!   (observer, owner, dimension) plus, for each ordered pair and
//!   dimension, the multiset of the `c` largest item values the observer
//!   sees in the owner's bundle. Two partial assignments with equal state
//!   are interchangeable, so layers are deduplicated; parent pointers
//!   recover a witness assignment.
//! * [`exists_strong`] first enumerates, per agent, a pledged set of at
//!   most `(n-1) * c` items committed to that agent's bundle; only pledged
//!   items may later be removed by enviers. For each family of disjoint
//!   pledged sets a value-only dynamic program assigns the remaining items,
//!   and a final subset search checks every ordered pair for a removal set
//!   within the pledge. Grouping by the pledged union rather than by
//!   per-pair removal tuples is sound because the final search considers
//!   every subset of the pledge anyway, and it collapses an enormous
//!   number of equivalent tuples into one family.
//!
//! Both deciders are deterministic: layers and families are explored in a
//! fixed order, hashing is used only to detect duplicates, and the first
//! satisfying state in insertion order provides the witness.

use crate::instance::{Allocation, Instance};
use crate::verify::cover_search;
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeciderLimits {
    /// Cap on dynamic-program states created in total.
    pub max_states: u64,
    /// Cap on pledged-set families enumerated (strong decider only).
    pub max_families: u64,
}

impl Default for DeciderLimits {
    fn default() -> Self {
        DeciderLimits { max_states: 10_000_000, max_families: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Exists(Allocation),
    NotExists,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decided {
    pub decision: Decision,
    /// Dynamic-program states created.
    pub states: u64,
    /// Pledged-set families examined (strong decider only).
    pub families: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecideError {
    StateCap { states: u64 },
    FamilyCap { families: u64 },
    PrefixOutOfRange { prefix: usize, items: usize },
}

impl fmt::Display for DecideError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecideError::StateCap { states } => {
                write!(f, "state cap exceeded after {states} dynamic-program states")
            }
            DecideError::FamilyCap { families } => {
                write!(f, "family cap exceeded after {families} pledged-set families")
            }
            DecideError::PrefixOutOfRange { prefix, items } => {
                write!(f, "prefix {prefix} out of range for {items} items")
            }
        }
    }
}

impl std::error::Error for DecideError {}

/// Decides whether a weak sEFc allocation exists, with default limits.
pub fn exists_weak(inst: &Instance, c: usize) -> Result<Decided, DecideError> {
    exists_weak_with(inst, c, &DeciderLimits::default())
}

/// Decides whether a strong sEFc allocation exists, with default limits.
pub fn exists_strong(inst: &Instance, c: usize) -> Result<Decided, DecideError> {
    exists_strong_with(inst, c, &DeciderLimits::default())
}

/// Encoding of a dynamic-program state as one flat `u64` vector.
///
/// Layout: first `n * n * dims` bundle values indexed by
/// `(observer * n + owner) * dims + dim`, then for each of the same triples
/// a descending list of the `tlen` largest item values (zero-padded). A
/// zero pad is indistinguishable from a zero-valued item, which is
/// harmless: removing a zero-valued item changes no total, so states that
/// differ only in that way are interchangeable.
#[derive(Clone, Copy)]
struct Shape {
    n: usize,
    dims: usize,
    tlen: usize,
}

impl Shape {
    fn v_len(&self) -> usize {
        self.n * self.n * self.dims
    }

    fn key_len(&self) -> usize {
        self.v_len() + self.v_len() * self.tlen
    }

    fn v_idx(&self, observer: usize, owner: usize, dim: usize) -> usize {
        (observer * self.n + owner) * self.dims + dim
    }

    fn t_idx(&self, observer: usize, owner: usize, dim: usize) -> usize {
        self.v_len() + ((observer * self.n + owner) * self.dims + dim) * self.tlen
    }
}

/// Inserts `v` into a descending top-values list, dropping the smallest.
fn insert_top(list: &mut [u64], v: u64) {
    let len = list.len();
    if len == 0 || v <= list[len - 1] {
        return;
    }
    list[len - 1] = v;
    let mut pos = len - 1;
    while pos > 0 && list[pos - 1] < list[pos] {
        list.swap(pos - 1, pos);
        pos -= 1;
    }
}

/// Applies "item `j` goes to agent `p`" to a state key.
fn apply(shape: &Shape, key: &mut [u64], inst: &Instance, j: usize, p: usize) {
    for i in 0..shape.n {
        for k in 0..shape.dims {
            let v = inst.value(i, j, k);
            key[shape.v_idx(i, p, k)] += v;
            if i != p && v > 0 && shape.tlen > 0 {
                let t = shape.t_idx(i, p, k);
                insert_top(&mut key[t..t + shape.tlen], v);
            }
        }
    }
}

struct Node {
    key: Vec<u64>,
    parent: usize,
    agent: usize,
}

/// Builds deduplicated layers for the first `prefix` items. `items` lists
/// the item indices to process, in order.
fn build_layers(
    inst: &Instance,
    shape: &Shape,
    items: &[usize],
    seed: Vec<u64>,
    states: &mut u64,
    limits: &DeciderLimits,
) -> Result<Vec<Vec<Node>>, DecideError> {
    let n = shape.n;
    let mut layers: Vec<Vec<Node>> = Vec::with_capacity(items.len() + 1);
    layers.push(vec![Node { key: seed, parent: usize::MAX, agent: usize::MAX }]);
    *states += 1;
    if *states > limits.max_states {
        return Err(DecideError::StateCap { states: *states });
    }
    for &j in items {
        let prev = layers.last().unwrap();
        let mut next: Vec<Node> = Vec::new();
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        for (pi, node) in prev.iter().enumerate() {
            for p in 0..n {
                let mut key = node.key.clone();
                apply(shape, &mut key, inst, j, p);
                if seen.contains_key(&key) {
                    continue;
                }
                seen.insert(key.clone(), next.len());
                next.push(Node { key, parent: pi, agent: p });
                *states += 1;
                if *states > limits.max_states {
                    return Err(DecideError::StateCap { states: *states });
                }
            }
        }
        layers.push(next);
    }
    Ok(layers)
}

/// Walks parent pointers back from a final-layer node to the per-item
/// agent choices, in processing order.
fn choices_from(layers: &[Vec<Node>], mut idx: usize) -> Vec<usize> {
    let mut rev = Vec::with_capacity(layers.len().saturating_sub(1));
    for depth in (1..layers.len()).rev() {
        let node = &layers[depth][idx];
        rev.push(node.agent);
        idx = node.parent;
    }
    rev.reverse();
    rev
}

pub fn exists_weak_with(
    inst: &Instance,
    c: usize,
    limits: &DeciderLimits,
) -> Result<Decided, DecideError> {
    let (n, m) = (inst.agents(), inst.items());
    if m <= n.saturating_mul(c) {
        // every round-robin bundle fits inside the removal budget
        let alloc = Allocation::round_robin(n, m);
        debug_assert!(crate::verify::verify_weak(inst, &alloc, c).unwrap().satisfied());
        return Ok(Decided { decision: Decision::Exists(alloc), states: 0, families: 0 });
    }
    let shape = Shape { n, dims: inst.dims(), tlen: c.min(m) };
    let items: Vec<usize> = (0..m).collect();
    let mut states = 0u64;
    let layers = build_layers(inst, &shape, &items, vec![0; shape.key_len()], &mut states, limits)?;
    let final_layer = layers.last().unwrap();
    for (idx, node) in final_layer.iter().enumerate() {
        if weak_final(&shape, &node.key) {
            let assignment = choices_from(&layers, idx);
            let alloc = Allocation::from_assignment(n, &assignment);
            debug_assert!(crate::verify::verify_weak(inst, &alloc, c).unwrap().satisfied());
            return Ok(Decided { decision: Decision::Exists(alloc), states, families: 0 });
        }
    }
    Ok(Decided { decision: Decision::NotExists, states, families: 0 })
}

/// Weak sEFc test on a completed state: every observer keeps up with every
/// owner in every dimension after the tracked top values are removed.
fn weak_final(shape: &Shape, key: &[u64]) -> bool {
    for i in 0..shape.n {
        for i2 in 0..shape.n {
            if i == i2 {
                continue;
            }
            for k in 0..shape.dims {
                let own = key[shape.v_idx(i, i, k)];
                let envied = key[shape.v_idx(i, i2, k)];
                let t = shape.t_idx(i, i2, k);
                let removable: u64 = key[t..t + shape.tlen].iter().sum();
                if envied.saturating_sub(removable) > own {
                    return false;
                }
            }
        }
    }
    true
}

pub fn exists_strong_with(
    inst: &Instance,
    c: usize,
    limits: &DeciderLimits,
) -> Result<Decided, DecideError> {
    let (n, m) = (inst.agents(), inst.items());
    if m <= n.saturating_mul(c) {
        // removing the whole envied round-robin bundle works in every
        // dimension at once
        let alloc = Allocation::round_robin(n, m);
        debug_assert!(crate::verify::verify_strong(inst, &alloc, c).unwrap().satisfied());
        return Ok(Decided { decision: Decision::Exists(alloc), states: 0, families: 0 });
    }
    // strong sEFc implies weak sEFc, so a weak nonexistence proof settles
    // the question without enumerating any pledged-set family
    let weak = exists_weak_with(inst, c, limits)?;
    if weak.decision == Decision::NotExists {
        return Ok(Decided { decision: Decision::NotExists, states: weak.states, families: 0 });
    }
    let cap = (n - 1).saturating_mul(c);
    let mut ctx = StrongCtx {
        inst,
        c,
        cap,
        limits,
        labels: vec![n; m],
        sizes: vec![0; n],
        states: weak.states,
        families: 0,
    };
    let found = ctx.enumerate(0)?;
    let decision = match found {
        Some(alloc) => {
            debug_assert!(crate::verify::verify_strong(inst, &alloc, c).unwrap().satisfied());
            Decision::Exists(alloc)
        }
        None => Decision::NotExists,
    };
    Ok(Decided { decision, states: ctx.states, families: ctx.families })
}

struct StrongCtx<'a> {
    inst: &'a Instance,
    c: usize,
    cap: usize,
    limits: &'a DeciderLimits,
    /// Per item: owning agent when pledged, or `n` for unpledged.
    labels: Vec<usize>,
    sizes: Vec<usize>,
    states: u64,
    families: u64,
}

impl StrongCtx<'_> {
    /// Depth-first enumeration of pledged-set families in label order,
    /// unpledged before agents, so the all-unpledged family comes first.
    fn enumerate(&mut self, d: usize) -> Result<Option<Allocation>, DecideError> {
        let (n, m) = (self.inst.agents(), self.inst.items());
        if d == m {
            self.families += 1;
            if self.families > self.limits.max_families {
                return Err(DecideError::FamilyCap { families: self.families });
            }
            return self.run_family();
        }
        for step in 0..=n {
            let label = if step == 0 { n } else { step - 1 };
            if label < n {
                if self.sizes[label] == self.cap {
                    continue;
                }
                self.sizes[label] += 1;
            }
            self.labels[d] = label;
            let r = self.enumerate(d + 1);
            if label < n {
                self.sizes[label] -= 1;
            }
            self.labels[d] = n;
            match r? {
                Some(alloc) => return Ok(Some(alloc)),
                None => continue,
            }
        }
        Ok(None)
    }

    /// Value-only dynamic program over the unpledged items, seeded with the
    /// pledged bundles' values, then a per-pair removal search inside the
    /// pledges.
    fn run_family(&mut self) -> Result<Option<Allocation>, DecideError> {
        let inst = self.inst;
        let (n, dims) = (inst.agents(), inst.dims());
        let shape = Shape { n, dims, tlen: 0 };
        let mut pledged: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut remaining: Vec<usize> = Vec::new();
        for (j, &label) in self.labels.iter().enumerate() {
            if label < n {
                pledged[label].push(j);
            } else {
                remaining.push(j);
            }
        }
        let mut seed = vec![0u64; shape.key_len()];
        for (p, items) in pledged.iter().enumerate() {
            for &j in items {
                apply(&shape, &mut seed, inst, j, p);
            }
        }
        let layers = build_layers(inst, &shape, &remaining, seed, &mut self.states, self.limits)?;
        let final_layer = layers.last().unwrap();
        for (idx, node) in final_layer.iter().enumerate() {
            if self.strong_final(&shape, &node.key, &pledged) {
                let choices = choices_from(&layers, idx);
                let mut bundles = pledged.clone();
                for (t, &j) in remaining.iter().enumerate() {
                    bundles[choices[t]].push(j);
                }
                return Ok(Some(Allocation::new(bundles)));
            }
        }
        Ok(None)
    }

    /// For every ordered pair, some subset of the owner's pledge with at
    /// most `c` items must cover the observer's deficit in all dimensions
    /// at once.
    fn strong_final(&self, shape: &Shape, key: &[u64], pledged: &[Vec<usize>]) -> bool {
        let inst = self.inst;
        let (n, dims) = (shape.n, shape.dims);
        for q in 0..n {
            for p in 0..n {
                if q == p {
                    continue;
                }
                let mut short_dims: Vec<usize> = Vec::new();
                let mut deficits: Vec<u64> = Vec::new();
                for k in 0..dims {
                    let own = key[shape.v_idx(q, q, k)];
                    let envied = key[shape.v_idx(q, p, k)];
                    if envied > own {
                        short_dims.push(k);
                        deficits.push(envied - own);
                    }
                }
                if deficits.is_empty() {
                    continue;
                }
                let candidates: Vec<(usize, Vec<u64>)> = pledged[p]
                    .iter()
                    .map(|&j| (j, short_dims.iter().map(|&k| inst.value(q, j, k)).collect()))
                    .collect();
                let mut nodes = 0u64;
                match cover_search(&candidates, &deficits, self.c, &mut nodes, u64::MAX) {
                    Ok(Some(_)) => {}
                    Ok(None) => return false,
                    Err(_) => unreachable!("unlimited node budget"),
                }
            }
        }
        true
    }
}

/// Number of distinct dynamic-program states after assigning the first
/// `prefix` items, using the weak-decider state encoding. Diagnostic; runs
/// the dynamic program even when the round-robin fast path would apply.
pub fn reachable_state_count(inst: &Instance, c: usize, prefix: usize) -> Result<u64, DecideError> {
    let m = inst.items();
    if prefix > m {
        return Err(DecideError::PrefixOutOfRange { prefix, items: m });
    }
    let shape = Shape { n: inst.agents(), dims: inst.dims(), tlen: c.min(m) };
    let items: Vec<usize> = (0..prefix).collect();
    let mut states = 0u64;
    let layers = build_layers(
        inst,
        &shape,
        &items,
        vec![0; shape.key_len()],
        &mut states,
        &DeciderLimits::default(),
    )?;
    Ok(layers.last().unwrap().len() as u64)
}
