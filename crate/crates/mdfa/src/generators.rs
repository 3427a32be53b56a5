//! Instance generators: small hard instances, Hadamard-based families with
//! unbounded removal requirements, reductions from classic NP-hard
//! problems, and seeded random instances.
//!
//! The reductions are equivalences, so they transport hardness both ways
//! and double as differential tests: the reduced fairness question answers
//! the original combinatorial question exactly.

use crate::instance::{Allocation, FairnessQuery, Instance};
use crate::prng::Prng;
use std::fmt;

/// Two identical agents, three binary items over three dimensions, with no
/// weak sEF1 allocation: every split leaves some dimension two items short
/// on one side.
pub fn no_weak_sef1_instance() -> Instance {
    Instance::identical(2, 3, vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]])
        .unwrap()
        .with_item_names(names(3))
        .unwrap()
}

/// Two identical agents, three items over two dimensions, weak sEF1 but
/// with no strong sEF1 allocation: no single removal fixes both dimensions
/// at once.
pub fn no_strong_sef1_instance() -> Instance {
    Instance::identical(2, 2, vec![vec![1, 1], vec![2, 0], vec![0, 2]])
        .unwrap()
        .with_item_names(names(3))
        .unwrap()
}

/// Two identical agents over `2c+1` items and dimensions, item `j` worth 1
/// in dimension `j` alone. No strong sEFc allocation exists, but strong
/// sEF(c+1) does: the notions separate at every budget.
pub fn diagonal_instance(c: usize) -> Instance {
    let d = 2 * c + 1;
    let rows = (0..d)
        .map(|j| (0..d).map(|k| u64::from(j == k)).collect())
        .collect();
    Instance::identical(2, d, rows)
        .unwrap()
        .with_item_names(names(d))
        .unwrap()
}

/// A Sylvester-construction Hadamard matrix: entries are +-1 and distinct
/// rows are orthogonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    rows: Vec<Vec<i64>>,
}

impl HadamardMatrix {
    /// Builds the symmetric Sylvester matrix of the given order, which must
    /// be a power of two (1 is allowed).
    pub fn sylvester(order: usize) -> Self {
        assert!(order.is_power_of_two(), "order {order} is not a power of two");
        let mut rows = vec![vec![1i64]];
        let mut size = 1;
        while size < order {
            let mut next = vec![vec![0i64; size * 2]; size * 2];
            for r in 0..size {
                for c in 0..size {
                    let v = rows[r][c];
                    next[r][c] = v;
                    next[r][c + size] = v;
                    next[r + size][c] = v;
                    next[r + size][c + size] = -v;
                }
            }
            rows = next;
            size *= 2;
        }
        HadamardMatrix { order, rows }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, row: usize, col: usize) -> i64 {
        self.rows[row][col]
    }

    /// Checks `H * H^T == order * I` exactly.
    pub fn is_orthogonal(&self) -> bool {
        let r = self.order;
        for a in 0..r {
            for b in 0..r {
                let dot: i64 = (0..r).map(|c| self.rows[a][c] * self.rows[b][c]).sum();
                let want = if a == b { r as i64 } else { 0 };
                if dot != want {
                    return false;
                }
            }
        }
        true
    }

    /// The 0/1 shift `(H + J) / 2`, mapping -1 to 0 and +1 to 1.
    pub fn zero_one(&self) -> Vec<Vec<u64>> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&v| ((v + 1) / 2) as u64).collect())
            .collect()
    }
}

/// Smallest power of two at least `4c^2 + 1`: the matrix order that pushes
/// the guaranteed disparity above `c`.
pub fn hadamard_order(c: usize) -> usize {
    (4 * c * c + 1).next_power_of_two()
}

/// Two identical agents whose binary valuations are the rows of a shifted
/// Hadamard matrix of order [`hadamard_order`]`(c)`. For any split of the
/// items into two bundles, some dimension's totals differ by more than
/// `c`, so no weak (hence no strong) sEFc allocation exists. Removal
/// budgets cannot be bounded by a constant.
pub fn hadamard_instance(c: usize) -> Instance {
    let r = hadamard_order(c);
    let h = HadamardMatrix::sylvester(r);
    debug_assert!(h.is_orthogonal());
    // the Sylvester matrix is symmetric, so rows-as-items equals
    // columns-as-items
    Instance::identical(2, r, h.zero_one())
        .unwrap()
        .with_item_names(names(r))
        .unwrap()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReduceError {
    NoClauses,
    ClauseVarOutOfRange { clause: usize, var: usize, num_vars: usize },
    ClauseVarsNotDistinct { clause: usize },
    OddTotal { total: u64 },
    TripletOutOfRange { triplet: usize, coordinate: usize, ground: usize },
    DuplicateTriplet { triplet: usize },
}

impl fmt::Display for ReduceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReduceError::NoClauses => write!(f, "formula has no clauses"),
            ReduceError::ClauseVarOutOfRange { clause, var, num_vars } => {
                write!(f, "clause {clause} uses variable {var}, but there are {num_vars}")
            }
            ReduceError::ClauseVarsNotDistinct { clause } => {
                write!(f, "clause {clause} repeats a variable")
            }
            ReduceError::OddTotal { total } => {
                write!(f, "weights sum to odd total {total}")
            }
            ReduceError::TripletOutOfRange { triplet, coordinate, ground } => {
                write!(f, "triplet {triplet} coordinate {coordinate} exceeds ground size {ground}")
            }
            ReduceError::DuplicateTriplet { triplet } => {
                write!(f, "triplet {triplet} duplicates an earlier one")
            }
        }
    }
}

impl std::error::Error for ReduceError {}

/// A monotone not-all-equal 3-SAT formula: clauses of three distinct
/// positive variables, satisfied when neither all-true nor all-false.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaeFormula {
    pub num_vars: usize,
    pub clauses: Vec<[usize; 3]>,
}

/// Reduces monotone NAE-3-SAT to weak sEF1 existence.
///
/// Variables become unit items, clauses become dimensions, and an item is
/// worth 1 in a dimension exactly when the variable appears in the clause.
/// A bundle split plays the role of a truth assignment: a clause dimension
/// totals 3 on one side exactly when its variables are all equal, and a
/// 0-3 split survives no single-item removal while 1-2 does. So the
/// formula is NAE-satisfiable iff the instance has a weak sEF1 allocation.
pub fn reduce_mnae3sat(formula: &NaeFormula) -> Result<(Instance, FairnessQuery), ReduceError> {
    if formula.clauses.is_empty() {
        return Err(ReduceError::NoClauses);
    }
    for (ci, clause) in formula.clauses.iter().enumerate() {
        for &var in clause {
            if var >= formula.num_vars {
                return Err(ReduceError::ClauseVarOutOfRange {
                    clause: ci,
                    var,
                    num_vars: formula.num_vars,
                });
            }
        }
        if clause[0] == clause[1] || clause[0] == clause[2] || clause[1] == clause[2] {
            return Err(ReduceError::ClauseVarsNotDistinct { clause: ci });
        }
    }
    let dims = formula.clauses.len();
    let rows: Vec<Vec<u64>> = (0..formula.num_vars)
        .map(|var| {
            formula
                .clauses
                .iter()
                .map(|clause| u64::from(clause.contains(&var)))
                .collect()
        })
        .collect();
    let inst = Instance::identical(2, dims, rows)
        .unwrap()
        .with_item_names((0..formula.num_vars).map(|v| format!("x{}", v + 1)).collect())
        .unwrap();
    Ok((inst, FairnessQuery::weak(1)))
}

/// Weights to split into two halves of equal sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSource {
    pub weights: Vec<u64>,
}

/// Reduces PARTITION to strong sEF1 existence.
///
/// Each weight becomes an item worth the weight in both dimensions, and two
/// blocker items worth `total + 1` in one dimension each force the blockers
/// onto opposite sides, where they are the single removal each envier
/// spends. What remains must balance exactly, so a strong sEF1 allocation
/// exists iff the weights admit an equal-sum split. Odd totals are
/// rejected; the caller already knows that answer.
pub fn reduce_partition(src: &PartitionSource) -> Result<(Instance, FairnessQuery), ReduceError> {
    let total: u64 = src.weights.iter().sum();
    if total % 2 != 0 {
        return Err(ReduceError::OddTotal { total });
    }
    let blocker = total + 1;
    let mut rows: Vec<Vec<u64>> = src.weights.iter().map(|&a| vec![a, a]).collect();
    rows.push(vec![blocker, 0]);
    rows.push(vec![0, blocker]);
    let mut item_names: Vec<String> =
        (0..src.weights.len()).map(|j| format!("g{}", j + 1)).collect();
    item_names.push("b1".to_owned());
    item_names.push("b2".to_owned());
    let inst = Instance::identical(2, 2, rows)
        .unwrap()
        .with_item_names(item_names)
        .unwrap();
    Ok((inst, FairnessQuery::strong(1)))
}

/// A three-dimensional matching question: `ground` elements per class and
/// triplets drawn from class X, Y, Z in that coordinate order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeDmSource {
    pub ground: usize,
    pub triplets: Vec<[usize; 3]>,
}

/// Reduces 3-dimensional matching to verification of a fixed allocation.
///
/// Items are the triplets plus one reference item worth 1 in every
/// dimension; dimensions are the `3 * ground` class elements; a triplet is
/// worth 1 in its three elements' dimensions. The fixed allocation hands
/// the reference item to agent 0 and every triplet to agent 1, and the
/// removal budget is `triplets - ground`. Agent 0's envy can be repaired
/// exactly when the removal can thin the triplets to a pairwise-disjoint
/// cover, i.e. when a perfect matching exists, so `verify_strong` on the
/// returned triple answers the matching question.
pub fn reduce_3dm(src: &ThreeDmSource) -> Result<(Instance, Allocation, usize), ReduceError> {
    let q = src.ground;
    for (ti, t) in src.triplets.iter().enumerate() {
        for (coord, &e) in t.iter().enumerate() {
            if e >= q {
                return Err(ReduceError::TripletOutOfRange {
                    triplet: ti,
                    coordinate: coord,
                    ground: q,
                });
            }
        }
        if src.triplets[..ti].contains(t) {
            return Err(ReduceError::DuplicateTriplet { triplet: ti });
        }
    }
    let dims = 3 * q;
    let mut rows: Vec<Vec<u64>> = vec![vec![1; dims]];
    for t in &src.triplets {
        let mut row = vec![0u64; dims];
        row[t[0]] = 1;
        row[q + t[1]] = 1;
        row[2 * q + t[2]] = 1;
        rows.push(row);
    }
    let mut item_names = vec!["ref".to_owned()];
    item_names.extend((0..src.triplets.len()).map(|t| format!("t{}", t + 1)));
    let inst = Instance::identical(2, dims, rows)
        .unwrap()
        .with_item_names(item_names)
        .unwrap();
    let alloc = Allocation::new(vec![vec![0], (1..=src.triplets.len()).collect()]);
    let c = src.triplets.len().saturating_sub(q);
    Ok((inst, alloc, c))
}

/// Seeded random instance. Draw order is fixed so outputs are reproducible
/// across implementations: one value in `0..=v_max` per (item, dimension)
/// pair in row-major order when `identical`, otherwise per (agent, item,
/// dimension) triple.
pub fn random_instance(
    seed: u64,
    agents: usize,
    items: usize,
    dims: usize,
    v_max: u64,
    identical: bool,
) -> Instance {
    let mut rng = Prng::new(seed);
    let inst = if identical {
        let rows: Vec<Vec<u64>> = (0..items)
            .map(|_| (0..dims).map(|_| rng.bounded(v_max)).collect())
            .collect();
        Instance::identical(agents, dims, rows).unwrap()
    } else {
        let per_agent: Vec<Vec<Vec<u64>>> = (0..agents)
            .map(|_| {
                (0..items)
                    .map(|_| (0..dims).map(|_| rng.bounded(v_max)).collect())
                    .collect()
            })
            .collect();
        Instance::new(dims, per_agent).unwrap()
    };
    inst.with_item_names(names(items)).unwrap()
}

fn names(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("g{}", j + 1)).collect()
}
