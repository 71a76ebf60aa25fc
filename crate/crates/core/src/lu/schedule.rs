//! Cycle-level schedules for the blocked factorization.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::dense;
use crate::error::Result;

/// Cost categories: O(b³) compute, O(b²) compute, O(b²) communication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    CompB3,
    CompB2,
    CommB2,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::CompB3, Category::CommB2, Category::CompB2];

    pub fn index(self) -> usize {
        match self {
            Category::CompB3 => 0,
            Category::CommB2 => 1,
            Category::CompB2 => 2,
        }
    }

    /// Exponent of `b` in the cost of one cycle.
    pub fn order(self) -> u32 {
        match self {
            Category::CompB3 => 3,
            _ => 2,
        }
    }

    pub fn is_comm(self) -> bool {
        self == Category::CommB2
    }
}

/// Writer of `A(j, k)` as seen at the start of iteration `i`.
fn prior(j: u32, k: u32, i: u32) -> Option<Op> {
    i.checked_sub(1).map(|p| Op::TrailSub { i: p, j, k })
}

/// A block held in processor memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BlockKey {
    A(u32, u32),
    Linv(u32),
    Uinv(u32),
    /// Product `L_ji · U_ik` awaiting subtraction from `A_jk`.
    Prod(u32, u32),
}

impl fmt::Display for BlockKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockKey::A(j, k) => write!(f, "A({j},{k})"),
            BlockKey::Linv(i) => write!(f, "Linv({i})"),
            BlockKey::Uinv(i) => write!(f, "Uinv({i})"),
            BlockKey::Prod(j, k) => write!(f, "Prod({j},{k})"),
        }
    }
}

/// One block-level operation of iteration `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Op {
    Factor { i: u32 },
    InvertL { i: u32 },
    InvertU { i: u32 },
    /// `A_ji ← A_ji · U_ii⁻¹`
    ColUpdate { i: u32, j: u32 },
    /// `A_ik ← L_ii⁻¹ · A_ik`
    RowUpdate { i: u32, k: u32 },
    /// `P_jk ← A_ji · A_ik`
    TrailMul { i: u32, j: u32, k: u32 },
    /// `A_jk ← A_jk − P_jk`
    TrailSub { i: u32, j: u32, k: u32 },
}

impl Op {
    pub fn category(&self) -> Category {
        match self {
            Op::TrailSub { .. } => Category::CompB2,
            _ => Category::CompB3,
        }
    }

    /// The triplet `(i, j, k)` this operation belongs to.
    pub fn triplet(&self) -> (u32, u32, u32) {
        match *self {
            Op::Factor { i } | Op::InvertL { i } | Op::InvertU { i } => (i, i, i),
            Op::ColUpdate { i, j } => (i, j, i),
            Op::RowUpdate { i, k } => (i, i, k),
            Op::TrailMul { i, j, k } | Op::TrailSub { i, j, k } => (i, j, k),
        }
    }

    /// Operand blocks, each paired with the operation whose output the
    /// sequential algorithm reads there (`None`: the input matrix).
    pub fn reads(&self) -> Vec<(BlockKey, Option<Op>)> {
        match *self {
            Op::Factor { i } => vec![(BlockKey::A(i, i), prior(i, i, i))],
            Op::InvertL { i } | Op::InvertU { i } => vec![(BlockKey::A(i, i), Some(Op::Factor { i }))],
            Op::ColUpdate { i, j } => vec![
                (BlockKey::A(j, i), prior(j, i, i)),
                (BlockKey::Uinv(i), Some(Op::InvertU { i })),
            ],
            Op::RowUpdate { i, k } => vec![
                (BlockKey::Linv(i), Some(Op::InvertL { i })),
                (BlockKey::A(i, k), prior(i, k, i)),
            ],
            Op::TrailMul { i, j, k } => vec![
                (BlockKey::A(j, i), Some(Op::ColUpdate { i, j })),
                (BlockKey::A(i, k), Some(Op::RowUpdate { i, k })),
            ],
            Op::TrailSub { i, j, k } => vec![
                (BlockKey::A(j, k), prior(j, k, i)),
                (BlockKey::Prod(j, k), Some(Op::TrailMul { i, j, k })),
            ],
        }
    }

    /// Last operation to write `A(j, k)` by the end of iteration `i`.
    pub fn final_writer(j: u32, k: u32, i: u32) -> Op {
        let m = j.min(k);
        if m > i {
            Op::TrailSub { i, j, k }
        } else if j == k {
            Op::Factor { i: m }
        } else if j > k {
            Op::ColUpdate { i: k, j }
        } else {
            Op::RowUpdate { i: j, k }
        }
    }

    pub fn writes(&self) -> BlockKey {
        match *self {
            Op::Factor { i } => BlockKey::A(i, i),
            Op::InvertL { i } => BlockKey::Linv(i),
            Op::InvertU { i } => BlockKey::Uinv(i),
            Op::ColUpdate { i, j } => BlockKey::A(j, i),
            Op::RowUpdate { i, k } => BlockKey::A(i, k),
            Op::TrailMul { j, k, .. } => BlockKey::Prod(j, k),
            Op::TrailSub { j, k, .. } => BlockKey::A(j, k),
        }
    }

    /// Applies the operation to operands given in [`Op::reads`] order.
    pub fn execute(&self, inputs: &[&[f64]], b: usize) -> Result<Vec<f64>> {
        Ok(match self {
            Op::Factor { .. } => {
                let mut a = inputs[0].to_vec();
                dense::lu_in_place(&mut a, b)?;
                a
            }
            Op::InvertL { .. } => dense::unit_lower_inverse(inputs[0], b),
            Op::InvertU { .. } => dense::upper_inverse(inputs[0], b)?,
            Op::ColUpdate { .. } | Op::RowUpdate { .. } | Op::TrailMul { .. } => {
                dense::matmul(inputs[0], inputs[1], b)
            }
            Op::TrailSub { .. } => {
                let mut a = inputs[0].to_vec();
                dense::sub_assign(&mut a, inputs[1]);
                a
            }
        })
    }
}

/// How a transfer travels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Medium {
    Bus(u32),
    Link,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Event {
    Compute { proc: u32, op: Op },
    Send { from: u32, to: Vec<u32>, key: BlockKey, medium: Medium },
}

/// Step of an iteration a cycle belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Diagonal,
    DiagonalBroadcast,
    Pivots,
    LUpdate,
    UUpdate,
    Exchange(u8),
    Operands,
    TrailMul,
    Results,
    TrailSub,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cycle {
    pub category: Category,
    pub phase: Phase,
    pub iteration: u32,
    pub events: Vec<Event>,
}

/// Interconnect the schedule runs on.
#[derive(Clone, Debug, PartialEq)]
pub enum Topology {
    /// Sorted member processors of each bus.
    Buses(Vec<Vec<u32>>),
    /// Sorted neighbours of each processor.
    Links(Vec<Vec<u32>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Scheme {
    /// Direct links along the matchings.
    Pg1,
    /// One bus per plane.
    Pg2,
    /// Square `q × q` processor grid.
    Mesh { q: u32 },
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Pg1 => f.write_str("pg1"),
            Scheme::Pg2 => f.write_str("pg2"),
            Scheme::Mesh { q } => write!(f, "mesh{q}x{q}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Schedule {
    pub scheme: Scheme,
    pub processors: usize,
    /// Block rows `B`.
    pub blocks: usize,
    pub topology: Topology,
    /// Home processors of `A(j, k)` at index `j·B + k`.
    pub homes: Vec<Vec<u32>>,
    pub cycles: Vec<Cycle>,
}

impl Schedule {
    pub fn homes_of(&self, j: usize, k: usize) -> &[u32] {
        &self.homes[j * self.blocks + k]
    }

    /// Processors with at least one compute event in the given phase.
    pub fn engaged(&self, iteration: u32, phase: Phase) -> BTreeSet<u32> {
        self.cycles
            .iter()
            .filter(|c| c.iteration == iteration && c.phase == phase)
            .flat_map(|c| c.events.iter())
            .filter_map(|e| match e {
                Event::Compute { proc, .. } => Some(*proc),
                _ => None,
            })
            .collect()
    }

    /// Number of cycles per category.
    pub fn totals(&self) -> [usize; 3] {
        let mut t = [0; 3];
        for c in &self.cycles {
            t[c.category.index()] += 1;
        }
        t
    }
}

/// Accumulates cycles for a schedule under construction.
#[derive(Default)]
pub(crate) struct Builder {
    pub cycles: Vec<Cycle>,
}

impl Builder {
    /// Runs per-processor operation lists side by side: cycle `c` holds the
    /// `c`-th operation of every list long enough.
    pub fn compute(&mut self, phase: Phase, iteration: u32, lists: &[Vec<Op>]) {
        let len = lists.iter().map(Vec::len).max().unwrap_or(0);
        for c in 0..len {
            let events: Vec<Event> = lists
                .iter()
                .enumerate()
                .filter_map(|(p, l)| l.get(c).map(|&op| Event::Compute { proc: p as u32, op }))
                .collect();
            let category = match &events[0] {
                Event::Compute { op, .. } => op.category(),
                Event::Send { .. } => unreachable!(),
            };
            self.cycles.push(Cycle {
                category,
                phase,
                iteration,
                events,
            });
        }
    }

    pub fn comm(&mut self, phase: Phase, iteration: u32, events: Vec<Event>) {
        self.cycles.push(Cycle {
            category: Category::CommB2,
            phase,
            iteration,
            events,
        });
    }
}

/// Distributes operations over per-processor lists, preserving order.
pub(crate) fn op_lists(processors: usize, assigned: &[(Vec<u32>, Op)]) -> Vec<Vec<Op>> {
    let mut lists = vec![Vec::new(); processors];
    for (procs, op) in assigned {
        for &p in procs {
            lists[p as usize].push(*op);
        }
    }
    lists
}

/// Cycle count scaled to time units of one `24 × 24` block multiply.
pub fn normalized_time(cycles: usize, b: usize, order: u32) -> f64 {
    cycles as f64 * (b as f64).powi(order as i32) / 24f64.powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_time_examples() {
        assert!((normalized_time(856, 24, 3) - 856.0).abs() < 1e-9);
        assert!((normalized_time(5023, 12, 3) - 627.875).abs() < 1e-9);
        assert!((normalized_time(188, 24, 2) - 7.8333).abs() < 1e-3);
    }

    #[test]
    fn op_keys() {
        let op = Op::TrailMul { i: 0, j: 2, k: 3 };
        let keys: Vec<BlockKey> = op.reads().into_iter().map(|(k, _)| k).collect();
        assert_eq!(keys, vec![BlockKey::A(2, 0), BlockKey::A(0, 3)]);
        assert_eq!(op.writes(), BlockKey::Prod(2, 3));
        assert_eq!(Op::TrailSub { i: 0, j: 2, k: 3 }.category(), Category::CompB2);
        assert_eq!(Op::ColUpdate { i: 1, j: 4 }.triplet(), (1, 4, 1));
    }

    #[test]
    fn writers_chain() {
        assert_eq!(Op::final_writer(3, 3, 5), Op::Factor { i: 3 });
        assert_eq!(Op::final_writer(4, 2, 5), Op::ColUpdate { i: 2, j: 4 });
        assert_eq!(Op::final_writer(1, 6, 5), Op::RowUpdate { i: 1, k: 6 });
        assert_eq!(Op::final_writer(7, 6, 5), Op::TrailSub { i: 5, j: 7, k: 6 });
        assert_eq!(Op::Factor { i: 0 }.reads(), vec![(BlockKey::A(0, 0), None)]);
        assert_eq!(
            Op::Factor { i: 2 }.reads(),
            vec![(BlockKey::A(2, 2), Some(Op::TrailSub { i: 1, j: 2, k: 2 }))]
        );
    }
}
