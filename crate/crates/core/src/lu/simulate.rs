//! Cycle-by-cycle execution of a schedule with invariant checks.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::reference::{BlockFactors, BlockLUProblem};
use super::schedule::{BlockKey, Category, Cycle, Event, Medium, Op, Schedule, Topology};
use crate::error::{invalid, Error, Result};

/// Per-category cycle accounting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleLog {
    pub processors: usize,
    /// Parallel cycles, indexed by [`Category::index`].
    pub totals: [usize; 3],
    /// Cycles in which each processor was active. A transfer counts for its
    /// sender only.
    pub active: Vec<[usize; 3]>,
}

impl CycleLog {
    pub fn from_schedule(s: &Schedule) -> Self {
        let mut totals = [0; 3];
        let mut active = vec![[0; 3]; s.processors];
        for c in &s.cycles {
            let cat = c.category.index();
            totals[cat] += 1;
            for e in &c.events {
                let p = match e {
                    Event::Compute { proc, .. } => *proc,
                    Event::Send { from, .. } => *from,
                };
                active[p as usize][cat] += 1;
            }
        }
        CycleLog {
            processors: s.processors,
            totals,
            active,
        }
    }

    pub fn total(&self, cat: Category) -> usize {
        self.totals[cat.index()]
    }

    /// Mean active cycles per processor.
    pub fn average(&self, cat: Category) -> f64 {
        let sum: usize = self.active.iter().map(|a| a[cat.index()]).sum();
        sum as f64 / self.processors as f64
    }

    pub fn max_active(&self, cat: Category) -> usize {
        self.active.iter().map(|a| a[cat.index()]).max().unwrap_or(0)
    }

    pub fn utilization(&self, cat: Category) -> f64 {
        match self.total(cat) {
            0 => 0.0,
            t => self.average(cat) / t as f64,
        }
    }

    /// Summed averages over summed totals.
    pub fn overall_utilization(&self) -> f64 {
        let avg: f64 = Category::ALL.iter().map(|&c| self.average(c)).sum();
        let tot: usize = self.totals.iter().sum();
        if tot == 0 {
            0.0
        } else {
            avg / tot as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub factors: BlockFactors,
    pub log: CycleLog,
}

#[derive(Clone)]
struct Copy {
    data: Arc<Vec<f64>>,
    /// Operation that produced this data; `None` for the input matrix.
    version: Option<Op>,
}

struct State<'a> {
    s: &'a Schedule,
    b: usize,
    mem: Vec<HashMap<BlockKey, Copy>>,
}

fn violation<T>(cycle: usize, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Invariant(format!("cycle {cycle}: {msg}")))
}

impl State<'_> {
    fn current(&self, proc: u32, key: BlockKey, version: Option<Op>) -> Option<&Arc<Vec<f64>>> {
        self.mem[proc as usize]
            .get(&key)
            .filter(|c| c.version == version)
            .map(|c| &c.data)
    }

    fn require(&self, cycle: usize, proc: u32, key: BlockKey, version: Option<Op>) -> Result<&Arc<Vec<f64>>> {
        match self.current(proc, key, version) {
            Some(d) => Ok(d),
            None => violation(
                cycle,
                format!("data not present: processor {proc} lacks {key} as written by {version:?}"),
            ),
        }
    }

    fn check_transfers(&self, t: usize, c: &Cycle) -> Result<()> {
        let n = self.s.processors;
        let mut sends = vec![0u8; n];
        let mut recvs = vec![0u8; n];
        let mut bus_used = HashMap::new();
        for e in &c.events {
            let Event::Send { from, to, key, medium } = e else {
                return violation(t, "compute event in a communication cycle");
            };
            if to.is_empty() {
                return violation(t, format!("transfer of {key} from {from} has no receiver"));
            }
            for &p in std::iter::once(from).chain(to) {
                if p as usize >= n {
                    return violation(t, format!("unknown processor {p}"));
                }
            }
            sends[*from as usize] += 1;
            for &r in to {
                recvs[r as usize] += 1;
            }
            match (medium, &self.s.topology) {
                (Medium::Bus(bus), Topology::Buses(members)) => {
                    let Some(m) = members.get(*bus as usize) else {
                        return violation(t, format!("unknown bus {bus}"));
                    };
                    if let Some(prev) = bus_used.insert(*bus, *from) {
                        return violation(t, format!("bus contention: {prev} and {from} both drive bus {bus}"));
                    }
                    if let Some(p) = std::iter::once(from).chain(to).find(|p| m.binary_search(p).is_err()) {
                        return violation(t, format!("processor {p} is not attached to bus {bus}"));
                    }
                }
                (Medium::Link, Topology::Links(adj)) => {
                    if to.len() != 1 || adj[*from as usize].binary_search(&to[0]).is_err() {
                        return violation(t, format!("no link from {from} to {to:?}"));
                    }
                }
                _ => return violation(t, "transfer medium does not match the topology"),
            }
        }
        for p in 0..n {
            if sends[p] > 0 && recvs[p] > 0 {
                return violation(t, format!("processor {p} sends and receives in the same cycle"));
            }
            if sends[p] > 1 {
                return violation(t, format!("processor {p} sends {} blocks in one cycle", sends[p]));
            }
            if recvs[p] > 1 {
                return violation(t, format!("processor {p} receives {} blocks in one cycle", recvs[p]));
            }
        }
        Ok(())
    }

    fn run_comm(&mut self, t: usize, c: &Cycle) -> Result<()> {
        self.check_transfers(t, c)?;
        let mut deliveries = Vec::new();
        for e in &c.events {
            if let Event::Send { from, to, key, .. } = e {
                let Some(copy) = self.mem[*from as usize].get(key) else {
                    return violation(t, format!("data not present: processor {from} cannot send {key}"));
                };
                for &r in to {
                    deliveries.push((r, *key, copy.clone()));
                }
            }
        }
        for (r, key, copy) in deliveries {
            self.mem[r as usize].insert(key, copy);
        }
        Ok(())
    }

    fn run_compute(&mut self, t: usize, c: &Cycle) -> Result<()> {
        let mut ops: Vec<(u32, Op)> = Vec::with_capacity(c.events.len());
        let mut busy = vec![false; self.s.processors];
        for e in &c.events {
            let Event::Compute { proc, op } = e else {
                return violation(t, "transfer in a compute cycle");
            };
            if op.category() != c.category {
                return violation(t, format!("{op:?} does not belong in a {:?} cycle", c.category));
            }
            if std::mem::replace(&mut busy[*proc as usize], true) {
                return violation(t, format!("processor {proc} runs two operations in one cycle"));
            }
            ops.push((*proc, *op));
        }
        // One writer per block per cycle, unless every writer runs the
        // identical replica.
        let mut writers: HashMap<BlockKey, Op> = HashMap::new();
        for (p, op) in &ops {
            if let Some(prev) = writers.insert(op.writes(), *op) {
                if prev != *op {
                    return violation(t, format!("write conflict on {} at processor {p}", op.writes()));
                }
            }
        }
        let mut inputs = Vec::with_capacity(ops.len());
        for (p, op) in &ops {
            let args: Vec<Arc<Vec<f64>>> = op
                .reads()
                .into_iter()
                .map(|(k, v)| self.require(t, *p, k, v).cloned())
                .collect::<Result<_>>()?;
            inputs.push(args);
        }
        let b = self.b;
        let results: Vec<Vec<f64>> = ops
            .par_iter()
            .zip(inputs.par_iter())
            .map(|((_, op), args)| {
                let refs: Vec<&[f64]> = args.iter().map(|a| a.as_slice()).collect();
                op.execute(&refs, b)
            })
            .collect::<Result<_>>()?;
        for ((p, op), data) in ops.iter().zip(results) {
            let copy = Copy {
                data: Arc::new(data),
                version: Some(*op),
            };
            self.mem[*p as usize].insert(op.writes(), copy);
        }
        Ok(())
    }

    /// Every home copy is current and all copies of a block agree bitwise;
    /// everything that is not a home copy is dropped.
    fn end_iteration(&mut self, t: usize, it: u32) -> Result<()> {
        let nb = self.s.blocks;
        for j in 0..nb {
            for k in 0..nb {
                let key = BlockKey::A(j as u32, k as u32);
                let v = Some(Op::final_writer(j as u32, k as u32, it));
                let homes = self.s.homes_of(j, k);
                let first = self.require(t, homes[0], key, v)?.clone();
                for &h in &homes[1..] {
                    if **self.require(t, h, key, v)? != *first {
                        return violation(t, format!("copies of {key} diverge at processor {h}"));
                    }
                }
            }
        }
        for (p, mem) in self.mem.iter_mut().enumerate() {
            mem.retain(|key, _| match *key {
                BlockKey::A(j, k) => self.s.homes[j as usize * nb + k as usize].contains(&(p as u32)),
                _ => false,
            });
        }
        Ok(())
    }
}

/// Executes `s` on `problem`, checking every schedule invariant each cycle.
pub fn simulate(s: &Schedule, problem: &BlockLUProblem) -> Result<SimOutcome> {
    let nb = problem.blocks();
    if s.blocks != nb || s.homes.len() != nb * nb {
        return invalid(format!("schedule covers {} block rows, problem has {nb}", s.blocks));
    }
    let mut st = State {
        s,
        b: problem.block_size(),
        mem: vec![HashMap::new(); s.processors],
    };
    for j in 0..nb {
        for k in 0..nb {
            let key = BlockKey::A(j as u32, k as u32);
            let data = Arc::new(problem.block(j, k));
            for &h in s.homes_of(j, k) {
                let copy = Copy {
                    data: data.clone(),
                    version: None,
                };
                st.mem[h as usize].insert(key, copy);
            }
        }
    }
    for (t, c) in s.cycles.iter().enumerate() {
        if c.category.is_comm() {
            st.run_comm(t, c)?;
        } else {
            st.run_compute(t, c)?;
        }
        if s.cycles.get(t + 1).is_none_or(|next| next.iteration != c.iteration) {
            st.end_iteration(t, c.iteration)?;
        }
    }
    let last = nb as u32 - 1;
    let blocks = (0..nb * nb)
        .map(|t| {
            let (j, k) = (t / nb, t % nb);
            let key = BlockKey::A(j as u32, k as u32);
            let v = Some(Op::final_writer(j as u32, k as u32, last));
            st.current(s.homes_of(j, k)[0], key, v).map(|d| d.as_ref().clone())
        })
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Invariant("final factors incomplete".into()))?;
    Ok(SimOutcome {
        factors: BlockFactors::from_blocks(problem.order(), problem.block_size(), blocks),
        log: CycleLog::from_schedule(s),
    })
}
