//! Polynomial-time allocators with worst-case fairness guarantees.
//!
//! All three constructions follow the same plan: relax the allocation to a
//! fractional one, pick an extreme point of a suitable polytope so that only
//! a bounded number of coordinates are fractional, then round. The envied
//! agent's fractional items (plus, for the n-agent allocator, its
//! pre-assigned blocks) form the removal set that certifies the guarantee.
//!
//! * [`allocate_two_agents`]: any two agents, strong removal budget
//!   `2*dims - 1`;
//! * [`allocate_two_agents_identical`]: two agents with equal valuations,
//!   budget `dims`;
//! * [`allocate_n_agents`]: any number of agents, budget `n^2 * dims^2`.

use crate::instance::{Allocation, Instance, InstanceError};
use crate::lp::{find_vertex, solve_to_vertex, LinearProgram, LpError, Relation};
use crate::rational::{rat, rat_u64, Rational};
use num_traits::{One, Zero};
use std::fmt;

/// Which polytope produced the fractional relaxation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FractionalSource {
    /// Two-agent program maximising the first agent's first dimension.
    TwoAgentObjective,
    /// Equal-split polytope for identical agents.
    IdenticalEquality,
    /// Share-dominance polytope over the items left after pre-assignment.
    DominancePolytope,
    /// No relaxation was solved (round-robin or single-agent fast path).
    None,
}

/// Fractional shares, `shares[agent][item]`, summing to 1 per item.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalAllocation {
    pub shares: Vec<Vec<Rational>>,
    pub source: FractionalSource,
}

/// Everything the allocator did, enough to replay the guarantee proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocatorTrace {
    /// `pre_assigned[agent][dim]`: items granted before the relaxation
    /// (n-agent allocator only, empty otherwise).
    pub pre_assigned: Vec<Vec<Vec<usize>>>,
    /// Items each agent received at share exactly 1.
    pub integral: Vec<Vec<usize>>,
    /// Items each agent received from rounding a fractional share.
    pub fractional: Vec<Vec<usize>>,
    pub shares: FractionalAllocation,
    /// Removal set that works against this agent as the envied side, for
    /// every envier and every dimension at once.
    pub suggested_removals: Vec<Vec<usize>>,
    /// The allocation is strong sEFc for this `c`.
    pub guarantee_c: usize,
    pub used_round_robin: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocatorResult {
    pub allocation: Allocation,
    pub trace: AllocatorTrace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AllocError {
    WrongAgentCount { expected: usize, actual: usize },
    NotIdentical,
    Lp(LpError),
}

impl fmt::Display for AllocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AllocError::WrongAgentCount { expected, actual } => {
                write!(f, "allocator needs {expected} agents, instance has {actual}")
            }
            AllocError::NotIdentical => write!(f, "allocator needs identical valuations"),
            AllocError::Lp(e) => write!(f, "relaxation failed: {e}"),
        }
    }
}

impl std::error::Error for AllocError {}

impl From<LpError> for AllocError {
    fn from(e: LpError) -> Self {
        AllocError::Lp(e)
    }
}

/// Picks the allocator with the best guarantee for the instance shape:
/// identical pairs get budget `dims`, general pairs `2*dims - 1`, everything
/// else `agents^2 * dims^2`.
pub fn allocate(inst: &Instance) -> Result<AllocatorResult, AllocError> {
    if inst.agents() == 2 {
        if inst.is_identical() {
            allocate_two_agents_identical(inst)
        } else {
            allocate_two_agents(inst)
        }
    } else {
        allocate_n_agents(inst)
    }
}

/// Two agents, arbitrary valuations: strong sEF(2*dims - 1).
///
/// Solves, over fractional shares `x[j]` of each item going to agent 0:
/// maximise agent 0's first-dimension advantage subject to agent 0 being
/// weakly ahead in every other dimension and agent 1 being weakly ahead
/// (with shares `1 - x`) in every dimension. The even split is feasible, so
/// the optimum exists; a vertex has at most `2*dims - 1` fractional shares
/// because the program has that many rows. Items are rounded toward whoever
/// holds the majority share (ties to agent 0).
pub fn allocate_two_agents(inst: &Instance) -> Result<AllocatorResult, AllocError> {
    if inst.agents() != 2 {
        return Err(AllocError::WrongAgentCount { expected: 2, actual: inst.agents() });
    }
    let (m, dims) = (inst.items(), inst.dims());
    let mut lp = LinearProgram::new(m);
    lp.bound_all(Some(Rational::zero()), Some(Rational::one()));
    let total = |agent: usize, k: usize| -> Rational {
        (0..m).map(|j| rat_u64(inst.value(agent, j, k))).fold(Rational::zero(), |a, t| a + t)
    };
    let doubled = |agent: usize, k: usize| -> Vec<Rational> {
        (0..m).map(|j| rat_u64(2 * inst.value(agent, j, k))).collect()
    };
    lp.maximize(doubled(0, 0));
    for k in 1..dims {
        lp.subject_to(doubled(0, k), Relation::Ge, total(0, k));
    }
    for k in 0..dims {
        lp.subject_to(doubled(1, k), Relation::Le, total(1, k));
    }
    let sol = solve_to_vertex(&lp)?;
    let guarantee_c = 2 * dims - 1;
    Ok(round_two_agent(sol.point, FractionalSource::TwoAgentObjective, guarantee_c))
}

/// Two agents with identical valuations: strong sEF(dims).
///
/// Here the relaxation is the polytope of exactly even splits in every
/// dimension; the even share is in it, and a vertex has at most `dims`
/// fractional coordinates.
pub fn allocate_two_agents_identical(inst: &Instance) -> Result<AllocatorResult, AllocError> {
    if inst.agents() != 2 {
        return Err(AllocError::WrongAgentCount { expected: 2, actual: inst.agents() });
    }
    if !inst.is_identical() {
        return Err(AllocError::NotIdentical);
    }
    let (m, dims) = (inst.items(), inst.dims());
    let mut lp = LinearProgram::new(m);
    lp.bound_all(Some(Rational::zero()), Some(Rational::one()));
    for k in 0..dims {
        let coeffs: Vec<Rational> = (0..m).map(|j| rat_u64(2 * inst.value(0, j, k))).collect();
        let rhs = (0..m)
            .map(|j| rat_u64(inst.value(0, j, k)))
            .fold(Rational::zero(), |a, t| a + t);
        lp.subject_to(coeffs, Relation::Eq, rhs);
    }
    let sol = find_vertex(&lp)?;
    Ok(round_two_agent(sol.point, FractionalSource::IdenticalEquality, dims))
}

fn round_two_agent(
    point: Vec<Rational>,
    source: FractionalSource,
    guarantee_c: usize,
) -> AllocatorResult {
    let half = rat(1, 2);
    let mut integral = vec![Vec::new(), Vec::new()];
    let mut fractional = vec![Vec::new(), Vec::new()];
    let mut bundles = vec![Vec::new(), Vec::new()];
    for (j, x) in point.iter().enumerate() {
        if x.is_one() {
            integral[0].push(j);
            bundles[0].push(j);
        } else if x.is_zero() {
            integral[1].push(j);
            bundles[1].push(j);
        } else if *x >= half {
            fractional[0].push(j);
            bundles[0].push(j);
        } else {
            fractional[1].push(j);
            bundles[1].push(j);
        }
    }
    let shares = vec![
        point.clone(),
        point.iter().map(|x| Rational::one() - x).collect(),
    ];
    debug_assert!(fractional[0].len() + fractional[1].len() <= guarantee_c);
    let suggested_removals = fractional.clone();
    AllocatorResult {
        allocation: Allocation::new(bundles),
        trace: AllocatorTrace {
            pre_assigned: vec![Vec::new(); 2],
            integral,
            fractional,
            shares: FractionalAllocation { shares, source },
            suggested_removals,
            guarantee_c,
            used_round_robin: false,
        },
    }
}

/// Any number of agents: strong sEF(n^2 * dims^2) where `n` is the agent
/// count.
///
/// With few items (`m <= n * c`) a round-robin deal already works: every
/// bundle fits inside the removal budget. Otherwise each (agent, dimension)
/// pair is pre-assigned the `(n-1)^2 * dims` items that agent values most
/// in that dimension among the items still unclaimed, which makes every
/// pre-assigned block dominate whatever one agent can later gain. The
/// leftover items are split by an extreme point of the share-dominance
/// polytope (each agent weakly prefers its own share vector to anyone
/// else's in every dimension); at most `n * (n-1) * dims` of them stay
/// fractional and are dealt round-robin, at most `(n-1) * dims` per agent.
pub fn allocate_n_agents(inst: &Instance) -> Result<AllocatorResult, AllocError> {
    let (n, m, dims) = (inst.agents(), inst.items(), inst.dims());
    if n == 1 {
        let bundles = vec![(0..m).collect::<Vec<_>>()];
        return Ok(AllocatorResult {
            allocation: Allocation::new(bundles),
            trace: AllocatorTrace {
                pre_assigned: vec![Vec::new()],
                integral: vec![(0..m).collect()],
                fractional: vec![Vec::new()],
                shares: FractionalAllocation {
                    shares: vec![vec![Rational::one(); m]],
                    source: FractionalSource::None,
                },
                suggested_removals: vec![Vec::new()],
                guarantee_c: 0,
                used_round_robin: false,
            },
        });
    }
    let guarantee_c = n * n * dims * dims;
    if m <= n * guarantee_c {
        // every round-robin bundle has at most ceil(m/n) <= c items, so the
        // whole envied bundle is a valid removal set
        let allocation = Allocation::round_robin(n, m);
        let suggested_removals = allocation.bundles().to_vec();
        let integral = allocation.bundles().to_vec();
        return Ok(AllocatorResult {
            allocation,
            trace: AllocatorTrace {
                pre_assigned: vec![Vec::new(); n],
                integral,
                fractional: vec![Vec::new(); n],
                shares: FractionalAllocation { shares: Vec::new(), source: FractionalSource::None },
                suggested_removals,
                guarantee_c,
                used_round_robin: true,
            },
        });
    }

    // pre-assignment: per (agent, dim), the (n-1)^2 * dims top items still
    // unclaimed, ties toward the lowest item index
    let block = (n - 1) * (n - 1) * dims;
    let mut remaining: Vec<bool> = vec![true; m];
    let mut pre_assigned: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); dims]; n];
    for i in 0..n {
        for k in 0..dims {
            for _ in 0..block {
                let mut best: Option<usize> = None;
                for j in 0..m {
                    if remaining[j] {
                        let better = match best {
                            None => true,
                            Some(b) => inst.value(i, j, k) > inst.value(i, b, k),
                        };
                        if better {
                            best = Some(j);
                        }
                    }
                }
                // m > n*c >= n * n * (n-1)^2 * dims^2 / n ... always enough items
                let j = best.expect("pre-assignment exhausted the items");
                remaining[j] = false;
                pre_assigned[i][k].push(j);
            }
        }
    }
    let rest: Vec<usize> = (0..m).filter(|&j| remaining[j]).collect();

    // share-dominance polytope over the rest: variables x[i][g] in row-major
    // order, agent i's share of rest[g]
    let r = rest.len();
    let var = |i: usize, g: usize| i * r + g;
    let mut lp = LinearProgram::new(n * r);
    lp.bound_all(Some(Rational::zero()), None);
    for i in 0..n {
        for i2 in 0..n {
            if i == i2 {
                continue;
            }
            for k in 0..dims {
                let mut coeffs = vec![Rational::zero(); n * r];
                for (g, &j) in rest.iter().enumerate() {
                    let v = rat_u64(inst.value(i, j, k));
                    coeffs[var(i, g)] += &v;
                    coeffs[var(i2, g)] -= &v;
                }
                lp.subject_to(coeffs, Relation::Ge, Rational::zero());
            }
        }
    }
    for g in 0..r {
        let mut coeffs = vec![Rational::zero(); n * r];
        for i in 0..n {
            coeffs[var(i, g)] = Rational::one();
        }
        lp.subject_to(coeffs, Relation::Eq, Rational::one());
    }
    let sol = find_vertex(&lp)?;

    let mut integral: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut frac_items: Vec<usize> = Vec::new();
    for (g, &j) in rest.iter().enumerate() {
        let owner = (0..n).find(|&i| sol.point[var(i, g)].is_one());
        match owner {
            Some(i) => integral[i].push(j),
            None => frac_items.push(j),
        }
    }
    debug_assert!(frac_items.len() <= n * (n - 1) * dims);

    // leftover fractional items go round-robin by ascending item index
    let mut fractional: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, &j) in frac_items.iter().enumerate() {
        fractional[t % n].push(j);
    }

    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut shares: Vec<Vec<Rational>> = vec![vec![Rational::zero(); m]; n];
    for i in 0..n {
        for k in 0..dims {
            for &j in &pre_assigned[i][k] {
                bundles[i].push(j);
                shares[i][j] = Rational::one();
            }
        }
        for &j in &integral[i] {
            bundles[i].push(j);
        }
        for &j in &fractional[i] {
            bundles[i].push(j);
        }
    }
    for (g, &j) in rest.iter().enumerate() {
        for i in 0..n {
            shares[i][j] = sol.point[var(i, g)].clone();
        }
    }

    // removing the envied agent's fractional pickups plus all its
    // pre-assigned blocks reduces it to its dominated integral share
    let mut suggested_removals: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut rem: Vec<usize> = fractional[i].clone();
        for k in 0..dims {
            rem.extend_from_slice(&pre_assigned[i][k]);
        }
        rem.sort_unstable();
        debug_assert!(rem.len() <= guarantee_c);
        suggested_removals.push(rem);
    }

    Ok(AllocatorResult {
        allocation: Allocation::new(bundles),
        trace: AllocatorTrace {
            pre_assigned,
            integral,
            fractional,
            shares: FractionalAllocation {
                shares,
                source: FractionalSource::DominancePolytope,
            },
            suggested_removals,
            guarantee_c,
            used_round_robin: false,
        },
    })
}

/// Checks that an allocator result is internally consistent and actually
/// satisfies its claimed guarantee. Intended for callers that want a
/// self-audit after constructing an allocation.
pub fn audit(inst: &Instance, result: &AllocatorResult) -> Result<(), InstanceError> {
    inst.check_allocation(&result.allocation)?;
    let v = crate::verify::verify_strong(inst, &result.allocation, result.trace.guarantee_c)
        .map_err(|e| match e {
            crate::verify::VerifyError::Instance(ie) => ie,
            crate::verify::VerifyError::NodeBudgetExceeded { .. } => {
                unreachable!("suggested removals keep the search linear")
            }
        })?;
    assert!(
        v.satisfied(),
        "allocator guarantee violated: strong budget {}",
        result.trace.guarantee_c
    );
    Ok(())
}
