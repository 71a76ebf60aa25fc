//! Bus-based schedule on P(4, GF(2)): processors are lines, buses are
//! planes.

use super::machine::{PgMachine, LINES, POINTS};
use super::schedule::{op_lists, BlockKey, Builder, Event, Medium, Op, Phase, Schedule, Scheme, Topology};
use crate::error::{invalid, Result};

pub(crate) fn bus_topology(m: &PgMachine) -> Topology {
    Topology::Buses(
        (0..LINES as u32)
            .map(|p| {
                let mut v = m.plane_lines(p).to_vec();
                v.sort_unstable();
                v
            })
            .collect(),
    )
}

pub(crate) fn pg_homes(m: &PgMachine, nb: usize) -> Vec<Vec<u32>> {
    (0..nb * nb).map(|t| m.memory_map(t / nb, t % nb)).collect()
}

/// Builds the bus schedule for `nb` block rows.
pub fn scheme2_schedule(m: &PgMachine, nb: usize) -> Result<Schedule> {
    if nb == 0 {
        return invalid("need at least one block row");
    }
    let mut out = Builder::default();
    for i in 0..nb {
        iteration(m, nb, i, &mut out);
    }
    Ok(Schedule {
        scheme: Scheme::Pg2,
        processors: LINES,
        blocks: nb,
        topology: bus_topology(m),
        homes: pg_homes(m, nb),
        cycles: out.cycles,
    })
}

fn iteration(m: &PgMachine, nb: usize, i: usize, out: &mut Builder) {
    let it = i as u32;
    let pi = (i % POINTS) as u32;
    let copies = m.diag_copies(pi);
    let through = m.lines_through(pi);

    // factor and invert the diagonal block on its five copies
    let diag: Vec<(Vec<u32>, Op)> = [Op::Factor { i: it }, Op::InvertL { i: it }, Op::InvertU { i: it }]
        .into_iter()
        .map(|op| (copies.to_vec(), op))
        .collect();
    for (procs, op) in diag {
        out.compute(Phase::Diagonal, it, &op_lists(LINES, &[(procs, op)]));
    }

    // each copy feeds the two other lines through the point on its bus
    for key in [BlockKey::Linv(it), BlockKey::Uinv(it)] {
        let events = copies
            .iter()
            .zip(m.diag_buses(pi))
            .map(|(&c, &bus)| Event::Send {
                from: c,
                to: m
                    .plane_lines(bus)
                    .iter()
                    .copied()
                    .filter(|&l| l != c && m.line_contains(l, pi))
                    .collect(),
                key,
                medium: Medium::Bus(bus),
            })
            .collect();
        out.comm(Phase::DiagonalBroadcast, it, events);
    }

    let rest = i + 1..nb;
    let col: Vec<(Vec<u32>, Op)> = rest
        .clone()
        .map(|j| (m.memory_map(j, i), Op::ColUpdate { i: it, j: j as u32 }))
        .collect();
    out.compute(Phase::LUpdate, it, &op_lists(LINES, &col));
    let row: Vec<(Vec<u32>, Op)> = rest
        .clone()
        .map(|k| (m.memory_map(i, k), Op::RowUpdate { i: it, k: k as u32 }))
        .collect();
    out.compute(Phase::UUpdate, it, &op_lists(LINES, &row));

    // Seven steps. In step q every line through the point broadcasts each
    // fresh block it holds on the plane S_q⁻¹(line), one per cycle, to the
    // lines of that plane off the point.
    let mut fresh: Vec<Vec<BlockKey>> = vec![Vec::new(); LINES];
    for j in rest.clone() {
        for (key, holders) in [
            (BlockKey::A(j as u32, it), m.memory_map(j, i)),
            (BlockKey::A(it, j as u32), m.memory_map(i, j)),
        ] {
            for l in holders {
                fresh[l as usize].push(key);
            }
        }
    }
    let longest = through.iter().map(|&l| fresh[l as usize].len()).max().unwrap_or(0);
    for q in 1..=7 {
        for c in 0..longest {
            let events = through
                .iter()
                .filter_map(|&l| {
                    let key = *fresh[l as usize].get(c)?;
                    let bus = m.matching(q).plane_of_line(l as usize) as u32;
                    let to = m
                        .plane_lines(bus)
                        .iter()
                        .copied()
                        .filter(|&r| !m.line_contains(r, pi))
                        .collect();
                    Some(Event::Send {
                        from: l,
                        to,
                        key,
                        medium: Medium::Bus(bus),
                    })
                })
                .collect();
            out.comm(Phase::Exchange(q as u8), it, events);
        }
    }

    let mut mul = Vec::new();
    let mut sub = Vec::new();
    for j in rest.clone() {
        for k in rest.clone() {
            let homes = m.memory_map(j, k);
            let (j, k) = (j as u32, k as u32);
            mul.push((homes.clone(), Op::TrailMul { i: it, j, k }));
            sub.push((homes, Op::TrailSub { i: it, j, k }));
        }
    }
    out.compute(Phase::TrailMul, it, &op_lists(LINES, &mul));
    out.compute(Phase::TrailSub, it, &op_lists(LINES, &sub));
}
