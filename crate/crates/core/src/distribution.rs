//! Block distributions of an `n × n` block grid over `n` processes, and
//! their matrix–vector communication cost.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::ProjectiveSpace;

/// Block coordinates `(row, col)`.
pub type Block = (u32, u32);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DistributionKind {
    RowWise,
    Projective { q: u64 },
    Custom,
}

/// Ownership of every block of an `n × n` grid.
#[derive(Clone, Debug, Serialize)]
pub struct DistributionMap {
    n: u32,
    kind: DistributionKind,
    /// Row-major owner table.
    owner: Vec<u32>,
    /// Blocks held by each process, in presentation order.
    blocks: Vec<Vec<Block>>,
}

impl DistributionMap {
    /// Custom map from a row-major owner table. Blocks are listed row-major.
    /// The table need not be weak-Cartesian; see [`validate_weak_cartesian`].
    pub fn from_owners(n: u32, owner: Vec<u32>) -> Result<Self> {
        if n == 0 {
            return invalid("process count must be >= 1");
        }
        if owner.len() != (n as usize) * (n as usize) {
            return invalid(format!("owner table has {} entries, expected {}", owner.len(), n * n));
        }
        if let Some(&bad) = owner.iter().find(|&&o| o >= n) {
            return invalid(format!("owner {bad} out of range 0..{n}"));
        }
        let mut blocks = vec![Vec::new(); n as usize];
        for i in 0..n {
            for j in 0..n {
                blocks[owner[(i * n + j) as usize] as usize].push((i, j));
            }
        }
        Ok(DistributionMap {
            n,
            kind: DistributionKind::Custom,
            owner,
            blocks,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn owner(&self, i: u32, j: u32) -> u32 {
        self.owner[(i * self.n + j) as usize]
    }

    pub fn blocks_of(&self, process: u32) -> &[Block] {
        &self.blocks[process as usize]
    }

    /// The owner table as rows.
    pub fn owner_matrix(&self) -> Vec<Vec<u32>> {
        self.owner.chunks(self.n as usize).map(|r| r.to_vec()).collect()
    }
}

/// Process `i` owns block row `i`.
pub fn rowwise_distribution(n: u32) -> Result<DistributionMap> {
    if n == 0 {
        return invalid("process count must be >= 1");
    }
    let owner = (0..n).flat_map(|i| (0..n).map(move |_| i)).collect();
    let blocks = (0..n).map(|i| (0..n).map(|j| (i, j)).collect()).collect();
    Ok(DistributionMap {
        n,
        kind: DistributionKind::RowWise,
        owner,
        blocks,
    })
}

/// Block `(i, j)` goes to the process whose line (in the cyclic labelling of
/// `P(2, GF(q))`) contains points `i` and `j`; diagonal blocks stay home.
pub fn projective_distribution(q: u64) -> Result<DistributionMap> {
    let space = ProjectiveSpace::with_order(2, q, &[])?;
    let lines = space.cyclic_lines()?;
    let n = space.point_count();
    let mut owner = vec![u32::MAX; (n * n) as usize];
    let mut blocks = Vec::with_capacity(n as usize);
    for (k, line) in lines.iter().enumerate() {
        let k = k as u32;
        owner[(k * n + k) as usize] = k;
        let mut mine = vec![(k, k)];
        for &a in line {
            for &b in line {
                if a == b {
                    continue;
                }
                let slot = &mut owner[(a * n + b) as usize];
                if *slot != u32::MAX {
                    return Err(Error::Invariant(format!("block ({a},{b}) lies on two lines")));
                }
                *slot = k;
                mine.push((a, b));
            }
        }
        blocks.push(mine);
    }
    if owner.contains(&u32::MAX) {
        return Err(Error::Invariant("projective map leaves a block unowned".into()));
    }
    Ok(DistributionMap {
        n,
        kind: DistributionKind::Projective { q },
        owner,
        blocks,
    })
}

/// A random weak-Cartesian map: diagonal blocks stay home and the shuffled
/// off-diagonal blocks are dealt `n - 1` to each process.
pub fn random_weak_cartesian(n: u32, seed: u64) -> Result<DistributionMap> {
    if n == 0 {
        return invalid("process count must be >= 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut off: Vec<Block> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    off.shuffle(&mut rng);
    let mut owner = vec![0u32; (n * n) as usize];
    for i in 0..n {
        owner[(i * n + i) as usize] = i;
    }
    for (slot, &(i, j)) in off.iter().enumerate() {
        owner[(i * n + j) as usize] = slot as u32 / (n - 1).max(1);
    }
    DistributionMap::from_owners(n, owner)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "condition")]
pub enum Violation {
    /// Condition 2: the diagonal block is held elsewhere.
    DiagonalNotHome { block: u32, owner: u32 },
    /// Condition 3: a process holds the wrong number of blocks.
    WrongBlockCount { process: u32, count: usize },
    /// Condition 4 (uniqueness): one process holds two diagonal blocks.
    TwoDiagonals { process: u32 },
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakCartesianReport {
    pub n: u32,
    pub valid: bool,
    pub violations: Vec<Violation>,
}

/// Checks the weak-Cartesian conditions. The tiling condition holds by
/// construction of an `n × n` owner table; single ownership likewise.
pub fn validate_weak_cartesian(map: &DistributionMap) -> WeakCartesianReport {
    let n = map.n();
    let mut violations = Vec::new();
    let mut diagonals = vec![0u32; n as usize];
    for i in 0..n {
        let o = map.owner(i, i);
        diagonals[o as usize] += 1;
        if o != i {
            violations.push(Violation::DiagonalNotHome { block: i, owner: o });
        }
    }
    for p in 0..n {
        if diagonals[p as usize] > 1 {
            violations.push(Violation::TwoDiagonals { process: p });
        }
        let count = map.blocks_of(p).len();
        if count != n as usize {
            violations.push(Violation::WrongBlockCount { process: p, count });
        }
    }
    WeakCartesianReport {
        n,
        valid: violations.is_empty(),
        violations,
    }
}

/// Distinct row and column indices of a block set.
pub fn minimal_submatrix(blocks: &[Block]) -> Result<(usize, usize)> {
    if blocks.is_empty() {
        return invalid("minimal submatrix of an empty block set");
    }
    let rows: BTreeSet<u32> = blocks.iter().map(|b| b.0).collect();
    let cols: BTreeSet<u32> = blocks.iter().map(|b| b.1).collect();
    Ok((rows.len(), cols.len()))
}

/// Dense matrix–vector communication needs of one process.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProcessComm {
    pub process: u32,
    /// Distinct block rows among owned blocks.
    pub r: usize,
    /// Distinct block columns among owned blocks.
    pub c: usize,
    /// Input blocks `X_j` that must be received (locally owned one excluded).
    pub inputs: Vec<u32>,
    /// Partial sums `Y_i` that must be sent (locally owned one excluded).
    pub partial_outputs: Vec<u32>,
}

impl ProcessComm {
    pub fn messages(&self) -> usize {
        self.inputs.len() + self.partial_outputs.len()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CommProfile {
    pub n: u32,
    pub processes: Vec<ProcessComm>,
    pub total_messages: usize,
    pub max_messages: usize,
}

/// Per-process dense communication. Process `k` is taken to own `X_k` and
/// `Y_k`.
pub fn comm_profile(map: &DistributionMap) -> CommProfile {
    let processes: Vec<ProcessComm> = (0..map.n())
        .map(|k| {
            let blocks = map.blocks_of(k);
            let rows: BTreeSet<u32> = blocks.iter().map(|b| b.0).collect();
            let cols: BTreeSet<u32> = blocks.iter().map(|b| b.1).collect();
            ProcessComm {
                process: k,
                r: rows.len(),
                c: cols.len(),
                inputs: cols.iter().copied().filter(|&j| j != k).collect(),
                partial_outputs: rows.iter().copied().filter(|&i| i != k).collect(),
            }
        })
        .collect();
    CommProfile {
        n: map.n(),
        total_messages: processes.iter().map(|p| p.messages()).sum(),
        max_messages: processes.iter().map(|p| p.messages()).max().unwrap_or(0),
        processes,
    }
}

/// `min over r of r + ceil(n / r)`, the least `r + c` with `r·c >= n`.
pub fn integer_lower_bound(n: u32) -> u32 {
    (1..=n.max(1)).map(|r| r + n.div_ceil(r)).min().unwrap_or(0)
}

/// `p` with `p² + p + 1 = n`, if any.
pub fn plane_order_for(n: u32) -> Option<u64> {
    (1..=n as u64).take_while(|p| p * p + p < n as u64).find(|p| p * p + p + 1 == n as u64)
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub n: u32,
    pub integer_bound: u32,
    pub samples: usize,
    /// Samples in which every process had `r·c >= n`.
    pub samples_rc_ge_n: usize,
    /// Samples in which every process had `r + c >= integer_bound`.
    pub samples_sum_ge_bound: usize,
    /// Smallest per-process `r + c` seen across all samples.
    pub min_sum_observed: u32,
    /// Largest per-process message count of the projective map, when `n = q²+q+1`.
    pub projective_max_messages: Option<usize>,
    pub holds: bool,
}

/// Samples random weak-Cartesian maps and checks the `r·c >= n` and
/// `r + c` lower bounds, plus the projective map's message count.
pub fn lower_bound_check(n: u32, samples: usize, seed: u64) -> Result<LowerBoundReport> {
    let bound = integer_lower_bound(n);
    let mut rc_ok = 0;
    let mut sum_ok = 0;
    let mut min_sum = u32::MAX;
    for s in 0..samples {
        let map = random_weak_cartesian(n, seed.wrapping_add(s as u64))?;
        let prof = comm_profile(&map);
        if prof.processes.iter().all(|p| p.r * p.c >= n as usize) {
            rc_ok += 1;
        }
        let sample_min = prof.processes.iter().map(|p| (p.r + p.c) as u32).min().unwrap_or(0);
        if sample_min >= bound {
            sum_ok += 1;
        }
        min_sum = min_sum.min(sample_min);
    }
    let projective_max_messages = match plane_order_for(n) {
        Some(q) if crate::galois::prime_power(q).is_some() => {
            Some(comm_profile(&projective_distribution(q)?).max_messages)
        }
        _ => None,
    };
    let proj_ok = projective_max_messages.is_none_or(|m| m as u32 <= bound + 2);
    Ok(LowerBoundReport {
        n,
        integer_bound: bound,
        samples,
        samples_rc_ge_n: rc_ok,
        samples_sum_ge_bound: sum_ok,
        min_sum_observed: if samples == 0 { 0 } else { min_sum },
        projective_max_messages,
        holds: rc_ok == samples && sum_ok == samples && proj_ok,
    })
}
