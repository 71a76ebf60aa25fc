//! Link-based schedules: the matching-link machine and the mesh baseline.
//! Both move blocks hop by hop with the greedy router.

use std::collections::HashMap;

use super::machine::{PgMachine, LINES};
use super::route::{route, Network};
use super::scheme2::pg_homes;
use super::schedule::{op_lists, BlockKey, Builder, Op, Phase, Schedule, Scheme, Topology};
use crate::error::{invalid, Result};

struct Plan<'a> {
    net: &'a Network,
    nb: usize,
    homes: &'a [Vec<u32>],
    site: &'a dyn Fn(usize, usize, usize) -> Vec<u32>,
}

impl Plan<'_> {
    fn homes(&self, j: usize, k: usize) -> &[u32] {
        &self.homes[j * self.nb + k]
    }

    fn transfer(&self, out: &mut Builder, phase: Phase, it: u32, holders: &mut HashMap<BlockKey, Vec<u32>>, req: &[(BlockKey, u32)]) {
        for events in route(self.net, holders, req) {
            out.comm(phase, it, events);
        }
    }

    fn iteration(&self, i: usize, out: &mut Builder) {
        let n = self.net.len();
        let it = i as u32;
        let rest = i + 1..self.nb;
        let hd = self.homes(i, i).to_vec();
        for op in [Op::Factor { i: it }, Op::InvertL { i: it }, Op::InvertU { i: it }] {
            out.compute(Phase::Diagonal, it, &op_lists(n, &[(hd.clone(), op)]));
        }

        let mut holders: HashMap<BlockKey, Vec<u32>> = HashMap::new();
        holders.insert(BlockKey::Linv(it), hd.clone());
        holders.insert(BlockKey::Uinv(it), hd.clone());
        let mut req = Vec::new();
        for j in rest.clone() {
            req.extend(self.homes(j, i).iter().map(|&h| (BlockKey::Uinv(it), h)));
            req.extend(self.homes(i, j).iter().map(|&h| (BlockKey::Linv(it), h)));
        }
        self.transfer(out, Phase::Pivots, it, &mut holders, &req);

        let col: Vec<_> = rest
            .clone()
            .map(|j| (self.homes(j, i).to_vec(), Op::ColUpdate { i: it, j: j as u32 }))
            .collect();
        out.compute(Phase::LUpdate, it, &op_lists(n, &col));
        let row: Vec<_> = rest
            .clone()
            .map(|k| (self.homes(i, k).to_vec(), Op::RowUpdate { i: it, k: k as u32 }))
            .collect();
        out.compute(Phase::UUpdate, it, &op_lists(n, &row));

        let mut req = Vec::new();
        let mut mul = Vec::new();
        let mut sub = Vec::new();
        let mut results = Vec::new();
        for j in rest.clone() {
            holders.insert(BlockKey::A(j as u32, it), self.homes(j, i).to_vec());
            holders.insert(BlockKey::A(it, j as u32), self.homes(i, j).to_vec());
        }
        for j in rest.clone() {
            for k in rest.clone() {
                let sites = (self.site)(i, j, k);
                let homes = self.homes(j, k).to_vec();
                for &s in &sites {
                    req.push((BlockKey::A(j as u32, it), s));
                    req.push((BlockKey::A(it, k as u32), s));
                }
                let (j, k) = (j as u32, k as u32);
                if sites != homes {
                    debug_assert_eq!(sites.len(), 1);
                    holders.insert(BlockKey::Prod(j, k), sites.clone());
                    results.extend(homes.iter().map(|&h| (BlockKey::Prod(j, k), h)));
                }
                mul.push((sites, Op::TrailMul { i: it, j, k }));
                sub.push((homes, Op::TrailSub { i: it, j, k }));
            }
        }
        self.transfer(out, Phase::Operands, it, &mut holders, &req);
        out.compute(Phase::TrailMul, it, &op_lists(n, &mul));
        self.transfer(out, Phase::Results, it, &mut holders, &results);
        out.compute(Phase::TrailSub, it, &op_lists(n, &sub));
    }

    fn build(&self) -> Vec<super::schedule::Cycle> {
        let mut out = Builder::default();
        for i in 0..self.nb {
            self.iteration(i, &mut out);
        }
        out.cycles
    }
}

/// Schedule on the machine whose processors are joined by the matching
/// links: trailing products of non-collinear point triples run on the line
/// matched by `S_1` to their plane and are shipped home for subtraction.
pub fn scheme1_schedule(m: &PgMachine, nb: usize) -> Result<Schedule> {
    if nb == 0 {
        return invalid("need at least one block row");
    }
    let net = Network::new(m.link_graph())?;
    let homes = pg_homes(m, nb);
    let site = |i: usize, j: usize, k: usize| m.compute_map_c1(i, j, k);
    let plan = Plan {
        net: &net,
        nb,
        homes: &homes,
        site: &site,
    };
    let cycles = plan.build();
    Ok(Schedule {
        scheme: Scheme::Pg1,
        processors: LINES,
        blocks: nb,
        topology: Topology::Links(net.adjacency().to_vec()),
        homes,
        cycles,
    })
}

/// Four-neighbour `q × q` grid without wrap-around; processor `r·q + c`.
pub fn grid_links(q: usize) -> Vec<Vec<u32>> {
    (0..q * q)
        .map(|p| {
            let (r, c) = (p / q, p % q);
            let mut a = Vec::new();
            if r > 0 {
                a.push((p - q) as u32);
            }
            if c > 0 {
                a.push((p - 1) as u32);
            }
            if c + 1 < q {
                a.push((p + 1) as u32);
            }
            if r + 1 < q {
                a.push((p + q) as u32);
            }
            a
        })
        .collect()
}

/// Block-cyclic fan-out factorization on a `q × q` grid: block `(j, k)`
/// lives on grid position `(j mod q, k mod q)`, where all of its updates run.
pub fn mesh_schedule(nb: usize, q: usize) -> Result<Schedule> {
    if nb == 0 || q == 0 {
        return invalid("need at least one block row and one processor");
    }
    let net = Network::new(grid_links(q))?;
    let homes: Vec<Vec<u32>> = (0..nb * nb)
        .map(|t| vec![((t / nb % q) * q + t % nb % q) as u32])
        .collect();
    let site = |_: usize, j: usize, k: usize| homes[j * nb + k].clone();
    let plan = Plan {
        net: &net,
        nb,
        homes: &homes,
        site: &site,
    };
    let cycles = plan.build();
    Ok(Schedule {
        scheme: Scheme::Mesh { q: q as u32 },
        processors: q * q,
        blocks: nb,
        topology: Topology::Links(net.adjacency().to_vec()),
        homes,
        cycles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lu::schedule::Category;

    #[test]
    fn grid_degrees() {
        let g = grid_links(3);
        assert_eq!(g[0], vec![1, 3]);
        assert_eq!(g[4].len(), 4);
    }

    #[test]
    fn single_processor_mesh_has_no_comm() {
        let s = mesh_schedule(4, 1).unwrap();
        assert_eq!(s.totals()[Category::CommB2.index()], 0);
    }

    #[test]
    fn mesh_compute_cycles_match_phase_model() {
        // 3 + L + U + T per iteration with one block per processor
        let s = mesh_schedule(12, 12).unwrap();
        assert_eq!(s.totals()[Category::CompB3.index()], 69);
        let s = mesh_schedule(24, 12).unwrap();
        assert_eq!(s.totals()[Category::CompB3.index()], 196);
    }
}
