//! Blocked sparse matrix–vector products over a block distribution, simulated
//! with explicit message accounting.
//!
//! Vector block `k` (both `X_k` and `Y_k`) lives on process `k`. A product runs
//! in three phases: input gather, local tile products, and reduction of
//! partial sums at the owner in ascending sender order.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::DistributionMap;
use crate::error::{invalid, Result};
use crate::sparse::CsrMatrix;

/// Split of `0..r` into `n` contiguous blocks of `floor(r/n)`, the last one
/// absorbing the remainder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockPartition {
    r: usize,
    starts: Vec<usize>,
}

impl BlockPartition {
    pub fn new(r: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("block count must be >= 1");
        }
        if r < n {
            return invalid(format!("cannot split dimension {r} into {n} nonempty blocks"));
        }
        let base = r / n;
        let mut starts: Vec<usize> = (0..n).map(|k| k * base).collect();
        starts.push(r);
        Ok(BlockPartition { r, starts })
    }

    pub fn dim(&self) -> usize {
        self.r
    }

    pub fn blocks(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn start(&self, k: usize) -> usize {
        self.starts[k]
    }

    pub fn size(&self, k: usize) -> usize {
        self.starts[k + 1] - self.starts[k]
    }

    /// Block containing global index `g`.
    pub fn block_of(&self, g: usize) -> usize {
        let base = self.starts[1];
        (g / base).min(self.blocks() - 1)
    }
}

/// A square matrix cut into an `n × n` grid of sparse tiles. Empty tiles are
/// not stored.
#[derive(Clone, Debug)]
pub struct BlockedMatrix {
    part: BlockPartition,
    tiles: BTreeMap<(u32, u32), CsrMatrix>,
}

pub fn tile_matrix(a: &CsrMatrix, n: usize) -> Result<BlockedMatrix> {
    if !a.is_square() {
        return invalid(format!("matrix is {}x{}, expected square", a.nrows(), a.ncols()));
    }
    let part = BlockPartition::new(a.nrows(), n)?;
    let mut buckets: BTreeMap<(u32, u32), Vec<(usize, usize, f64)>> = BTreeMap::new();
    for (i, j, v) in a.triplets() {
        let (bi, bj) = (part.block_of(i), part.block_of(j));
        buckets
            .entry((bi as u32, bj as u32))
            .or_default()
            .push((i - part.start(bi), j - part.start(bj), v));
    }
    let tiles = buckets
        .into_iter()
        .map(|((bi, bj), t)| {
            let m = CsrMatrix::from_triplets(part.size(bi as usize), part.size(bj as usize), &t)?;
            Ok(((bi, bj), m))
        })
        .collect::<Result<_>>()?;
    Ok(BlockedMatrix { part, tiles })
}

impl BlockedMatrix {
    pub fn partition(&self) -> &BlockPartition {
        &self.part
    }

    pub fn n(&self) -> usize {
        self.part.blocks()
    }

    pub fn tile(&self, i: u32, j: u32) -> Option<&CsrMatrix> {
        self.tiles.get(&(i, j))
    }

    pub fn tiles(&self) -> impl Iterator<Item = ((u32, u32), &CsrMatrix)> {
        self.tiles.iter().map(|(&k, v)| (k, v))
    }

    /// Reassembles the global matrix.
    pub fn assemble(&self) -> Result<CsrMatrix> {
        let t: Vec<(usize, usize, f64)> = self
            .tiles
            .iter()
            .flat_map(|(&(bi, bj), m)| {
                let (r0, c0) = (self.part.start(bi as usize), self.part.start(bj as usize));
                m.triplets().into_iter().map(move |(i, j, v)| (i + r0, j + c0, v))
            })
            .collect();
        CsrMatrix::from_triplets(self.part.dim(), self.part.dim(), &t)
    }
}

/// A tile with its all-zero rows and columns removed.
#[derive(Clone, Debug, PartialEq)]
pub struct PackedBlock {
    pub block: (u32, u32),
    pub rows: usize,
    pub cols: usize,
    pub kept_rows: Vec<usize>,
    pub kept_cols: Vec<usize>,
    pub packed: CsrMatrix,
}

pub fn pack_block(block: (u32, u32), tile: &CsrMatrix) -> Result<PackedBlock> {
    let empty_rows: BTreeSet<usize> = tile.empty_rows().into_iter().collect();
    let empty_cols: BTreeSet<usize> = tile.empty_cols().into_iter().collect();
    let kept_rows: Vec<usize> = (0..tile.nrows()).filter(|r| !empty_rows.contains(r)).collect();
    let kept_cols: Vec<usize> = (0..tile.ncols()).filter(|c| !empty_cols.contains(c)).collect();
    let packed = remap(tile, &kept_rows, &kept_cols)?;
    Ok(PackedBlock {
        block,
        rows: tile.nrows(),
        cols: tile.ncols(),
        kept_rows,
        kept_cols,
        packed,
    })
}

impl PackedBlock {
    pub fn unpack(&self) -> Result<CsrMatrix> {
        let t: Vec<(usize, usize, f64)> = self
            .packed
            .triplets()
            .into_iter()
            .map(|(i, j, v)| (self.kept_rows[i], self.kept_cols[j], v))
            .collect();
        CsrMatrix::from_triplets(self.rows, self.cols, &t)
    }
}

/// Re-indexes a tile onto sorted row/column subsets that cover its entries.
fn remap(tile: &CsrMatrix, rows: &[usize], cols: &[usize]) -> Result<CsrMatrix> {
    let pos = |list: &[usize], x: usize| list.binary_search(&x).expect("layout covers every entry");
    let t: Vec<(usize, usize, f64)> = tile
        .triplets()
        .into_iter()
        .map(|(i, j, v)| (pos(rows, i), pos(cols, j), v))
        .collect();
    CsrMatrix::from_triplets(rows.len(), cols.len(), &t)
}

/// Gathers the entries of `x_j` at a receiver's packed column layout.
pub fn pack_vector(x_j: &[f64], layout: &[usize]) -> Vec<f64> {
    layout.iter().map(|&c| x_j[c]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorRole {
    Input,
    PartialSum,
    Reduced,
}

/// A piece of a block vector in transit or at rest. `layout` lists the
/// block-local indices the values belong to.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorBlock {
    pub index: u32,
    pub role: VectorRole,
    pub layout: Vec<usize>,
    pub values: Vec<f64>,
}

/// A vector split by a [`BlockPartition`]; block `k` belongs to process `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockedVector {
    pub blocks: Vec<Vec<f64>>,
}

impl BlockedVector {
    pub fn split(part: &BlockPartition, x: &[f64]) -> Result<Self> {
        if x.len() != part.dim() {
            return invalid(format!("vector length {} for dimension {}", x.len(), part.dim()));
        }
        Ok(BlockedVector {
            blocks: (0..part.blocks())
                .map(|k| x[part.start(k)..part.start(k) + part.size(k)].to_vec())
                .collect(),
        })
    }

    pub fn join(&self) -> Vec<f64> {
        self.blocks.concat()
    }
}

/// Count and element volume of a class of messages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Traffic {
    pub messages: u64,
    pub elements: u64,
}

impl Traffic {
    fn add(&mut self, elements: usize) {
        self.messages += 1;
        self.elements += elements as u64;
    }

    fn merge(&mut self, o: &Traffic) {
        self.messages += o.messages;
        self.elements += o.elements;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProcessTraffic {
    pub process: u32,
    pub gather_sent: Traffic,
    pub gather_received: Traffic,
    pub partial_sent: Traffic,
    pub partial_received: Traffic,
    pub scalar_sent: Traffic,
    pub scalar_received: Traffic,
}

impl ProcessTraffic {
    /// Vector-block messages this process takes part in as receiver of inputs
    /// or sender of partial sums.
    pub fn block_messages(&self) -> u64 {
        self.gather_received.messages + self.partial_sent.messages
    }

    fn merge(&mut self, o: &ProcessTraffic) {
        self.gather_sent.merge(&o.gather_sent);
        self.gather_received.merge(&o.gather_received);
        self.partial_sent.merge(&o.partial_sent);
        self.partial_received.merge(&o.partial_received);
        self.scalar_sent.merge(&o.scalar_sent);
        self.scalar_received.merge(&o.scalar_received);
    }
}

/// Per-process message accounting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MessageLog {
    pub processes: Vec<ProcessTraffic>,
}

impl MessageLog {
    pub fn new(n: usize) -> Self {
        MessageLog {
            processes: (0..n)
                .map(|p| ProcessTraffic {
                    process: p as u32,
                    ..Default::default()
                })
                .collect(),
        }
    }

    pub fn merge(&mut self, other: &MessageLog) {
        for (a, b) in self.processes.iter_mut().zip(&other.processes) {
            a.merge(b);
        }
    }

    pub fn totals(&self) -> ProcessTraffic {
        let mut t = ProcessTraffic::default();
        for p in &self.processes {
            t.merge(p);
        }
        t
    }

    /// Sent equals received in every phase.
    pub fn is_conserved(&self) -> bool {
        let t = self.totals();
        t.gather_sent == t.gather_received && t.partial_sent == t.partial_received && t.scalar_sent == t.scalar_received
    }

    /// Total vector elements moved by gathers and partial sums.
    pub fn vector_volume(&self) -> u64 {
        let t = self.totals();
        t.gather_sent.elements + t.partial_sent.elements
    }

    /// Records one scalar all-reduce: gather to process 0, then broadcast.
    pub fn record_allreduce(&mut self) {
        let n = self.processes.len();
        for p in 1..n {
            self.processes[p].scalar_sent.add(1);
            self.processes[0].scalar_received.add(1);
            self.processes[0].scalar_sent.add(1);
            self.processes[p].scalar_received.add(1);
        }
    }
}

#[derive(Clone, Debug)]
struct PlannedTile {
    tile: CsrMatrix,
    input_slot: usize,
    output_slot: usize,
}

#[derive(Clone, Debug)]
struct ProcessPlan {
    /// `(j, column layout within block j)` for each input block used.
    inputs: Vec<(u32, Vec<usize>)>,
    /// `(i, row layout within block i)` for each partial sum produced.
    outputs: Vec<(u32, Vec<usize>)>,
    tiles: Vec<PlannedTile>,
}

/// Precomputed communication structure for repeated products with one
/// matrix and distribution. With packing, each process receives only the
/// input entries its tiles touch and sends only the partial-sum rows they
/// produce; the layouts are agreed at setup.
#[derive(Clone, Debug)]
pub struct SpmvPlan {
    part: BlockPartition,
    packing: bool,
    procs: Vec<ProcessPlan>,
}

impl SpmvPlan {
    pub fn new(dist: &DistributionMap, a: &BlockedMatrix, packing: bool) -> Result<Self> {
        let n = a.n();
        if dist.n() as usize != n {
            return invalid(format!("distribution has {} processes, matrix has {n} block rows", dist.n()));
        }
        let part = a.partition().clone();
        let mut procs = Vec::with_capacity(n);
        for p in 0..n as u32 {
            let mut mine: Vec<((u32, u32), &CsrMatrix)> = dist
                .blocks_of(p)
                .iter()
                .filter_map(|&(i, j)| a.tile(i, j).map(|t| ((i, j), t)))
                .collect();
            mine.sort_by_key(|&(k, _)| k);
            let mut col_sets: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
            let mut row_sets: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
            for &((i, j), t) in &mine {
                let (cs, rs) = (col_sets.entry(j).or_default(), row_sets.entry(i).or_default());
                if packing {
                    let empty_c: BTreeSet<usize> = t.empty_cols().into_iter().collect();
                    let empty_r: BTreeSet<usize> = t.empty_rows().into_iter().collect();
                    cs.extend((0..t.ncols()).filter(|c| !empty_c.contains(c)));
                    rs.extend((0..t.nrows()).filter(|r| !empty_r.contains(r)));
                } else {
                    cs.extend(0..t.ncols());
                    rs.extend(0..t.nrows());
                }
            }
            let inputs: Vec<(u32, Vec<usize>)> =
                col_sets.into_iter().map(|(j, s)| (j, s.into_iter().collect())).collect();
            let outputs: Vec<(u32, Vec<usize>)> =
                row_sets.into_iter().map(|(i, s)| (i, s.into_iter().collect())).collect();
            let tiles = mine
                .iter()
                .map(|&((i, j), t)| {
                    let input_slot = inputs.iter().position(|x| x.0 == j).expect("column registered");
                    let output_slot = outputs.iter().position(|x| x.0 == i).expect("row registered");
                    let tile = if packing {
                        remap(t, &outputs[output_slot].1, &inputs[input_slot].1)?
                    } else {
                        t.clone()
                    };
                    Ok(PlannedTile {
                        tile,
                        input_slot,
                        output_slot,
                    })
                })
                .collect::<Result<_>>()?;
            procs.push(ProcessPlan { inputs, outputs, tiles });
        }
        Ok(SpmvPlan { part, packing, procs })
    }

    pub fn packing(&self) -> bool {
        self.packing
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.part
    }

    /// Input blocks process `p` reads, including its own.
    pub fn input_blocks(&self, p: usize) -> Vec<u32> {
        self.procs[p].inputs.iter().map(|x| x.0).collect()
    }

    /// `y = A x` with message accounting.
    pub fn execute(&self, x: &BlockedVector) -> Result<(BlockedVector, MessageLog)> {
        let n = self.procs.len();
        if x.blocks.len() != n || (0..n).any(|k| x.blocks[k].len() != self.part.size(k)) {
            return invalid("vector does not match the matrix partition");
        }
        let mut log = MessageLog::new(n);

        // phase 1: input gather
        let mut received: Vec<Vec<VectorBlock>> = Vec::with_capacity(n);
        for (p, plan) in self.procs.iter().enumerate() {
            let mut mine = Vec::with_capacity(plan.inputs.len());
            for (j, layout) in &plan.inputs {
                let values = pack_vector(&x.blocks[*j as usize], layout);
                if *j as usize != p {
                    log.processes[*j as usize].gather_sent.add(values.len());
                    log.processes[p].gather_received.add(values.len());
                }
                mine.push(VectorBlock {
                    index: *j,
                    role: VectorRole::Input,
                    layout: layout.clone(),
                    values,
                });
            }
            received.push(mine);
        }

        // phase 2: local tile products
        let partials: Vec<Vec<VectorBlock>> = self
            .procs
            .par_iter()
            .zip(received.par_iter())
            .map(|(plan, inputs)| {
                let mut out: Vec<VectorBlock> = plan
                    .outputs
                    .iter()
                    .map(|(i, layout)| VectorBlock {
                        index: *i,
                        role: VectorRole::PartialSum,
                        layout: layout.clone(),
                        values: vec![0.0; layout.len()],
                    })
                    .collect();
                for t in &plan.tiles {
                    let xin = &inputs[t.input_slot].values;
                    let y = &mut out[t.output_slot].values;
                    for (r, yr) in y.iter_mut().enumerate().take(t.tile.nrows()) {
                        *yr += t.tile.row(r).fold(0.0, |acc, (c, v)| acc + v * xin[c]);
                    }
                }
                out
            })
            .collect();

        // phase 3: reduction at the owner, ascending sender id
        let mut y: Vec<Vec<f64>> = (0..n).map(|k| vec![0.0; self.part.size(k)]).collect();
        for (p, parts) in partials.iter().enumerate() {
            for part in parts {
                let i = part.index as usize;
                if i != p {
                    log.processes[p].partial_sent.add(part.values.len());
                    log.processes[i].partial_received.add(part.values.len());
                }
                for (&r, &v) in part.layout.iter().zip(&part.values) {
                    y[i][r] += v;
                }
            }
        }
        Ok((BlockedVector { blocks: y }, log))
    }
}

/// One unpacked product.
pub fn spmv(dist: &DistributionMap, a: &BlockedMatrix, x: &BlockedVector) -> Result<(BlockedVector, MessageLog)> {
    SpmvPlan::new(dist, a, false)?.execute(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{projective_distribution, rowwise_distribution};
    use crate::generate::poisson2d;

    #[test]
    fn partition_sizes() {
        let p = BlockPartition::new(10, 3).unwrap();
        assert_eq!((p.size(0), p.size(1), p.size(2)), (3, 3, 4));
        assert_eq!(p.block_of(9), 2);
        assert_eq!(p.block_of(5), 1);
        assert!(BlockPartition::new(2, 3).is_err());
    }

    #[test]
    fn identity_tiles_only_on_diagonal() {
        let b = tile_matrix(&CsrMatrix::identity(13), 13).unwrap();
        let keys: Vec<(u32, u32)> = b.tiles().map(|(k, _)| k).collect();
        assert_eq!(keys, (0..13).map(|i| (i, i)).collect::<Vec<_>>());
        let x = BlockedVector::split(b.partition(), &(0..13).map(|v| v as f64).collect::<Vec<_>>()).unwrap();
        let (y, log) = spmv(&projective_distribution(3).unwrap(), &b, &x).unwrap();
        assert_eq!(y, x);
        assert_eq!(log.totals().gather_sent.messages, 0);
        assert_eq!(log.totals().partial_sent.messages, 0);
    }

    #[test]
    fn tiling_is_lossless() {
        let a = poisson2d(10).unwrap();
        let b = tile_matrix(&a, 7).unwrap();
        assert_eq!(b.assemble().unwrap(), a);
    }

    #[test]
    fn pack_round_trip_and_zero_columns() {
        let t = CsrMatrix::from_triplets(4, 6, &[(0, 1, 1.0), (2, 1, 2.0), (2, 4, 3.0)]).unwrap();
        let pb = pack_block((0, 1), &t).unwrap();
        assert_eq!(pb.kept_rows, vec![0, 2]);
        assert_eq!(pb.kept_cols, vec![1, 4]);
        assert!(pb.packed.empty_rows().is_empty() && pb.packed.empty_cols().is_empty());
        assert_eq!(pb.unpack().unwrap(), t);
        assert_eq!(pack_vector(&[0., 1., 2., 3., 4., 5.], &pb.kept_cols), vec![1.0, 4.0]);
    }

    #[test]
    fn process_zero_partials_for_p3() {
        let dense: Vec<f64> = (0..169).map(|k| 1.0 + (k % 7) as f64).collect();
        let a = CsrMatrix::from_dense(13, 13, &dense).unwrap();
        let b = tile_matrix(&a, 13).unwrap();
        let plan = SpmvPlan::new(&projective_distribution(3).unwrap(), &b, false).unwrap();
        assert_eq!(plan.input_blocks(0), vec![0, 2, 6, 7, 9]);
        let outs: Vec<u32> = plan.procs[0].outputs.iter().map(|o| o.0).collect();
        assert_eq!(outs, vec![0, 2, 6, 7, 9]);
    }

    #[test]
    fn row_wise_vs_projective_dense_counts() {
        let dense: Vec<f64> = (0..130 * 130).map(|k| ((k * 37) % 11) as f64 + 1.0).collect();
        let a = CsrMatrix::from_dense(130, 130, &dense).unwrap();
        let b = tile_matrix(&a, 13).unwrap();
        let x = BlockedVector::split(b.partition(), &vec![1.0; 130]).unwrap();
        let (yr, lr) = spmv(&rowwise_distribution(13).unwrap(), &b, &x).unwrap();
        let (yp, lp) = spmv(&projective_distribution(3).unwrap(), &b, &x).unwrap();
        let reference = a.matvec(&vec![1.0; 130]).unwrap();
        for (u, v) in yr.join().iter().zip(&reference) {
            assert!((u - v).abs() <= 1e-12 * v.abs());
        }
        for (u, v) in yp.join().iter().zip(&reference) {
            assert!((u - v).abs() <= 1e-12 * v.abs());
        }
        assert!(lr.processes.iter().all(|p| p.block_messages() == 12));
        assert!(lp.processes.iter().all(|p| p.block_messages() <= 8));
        assert!(lr.is_conserved() && lp.is_conserved());
    }
}
