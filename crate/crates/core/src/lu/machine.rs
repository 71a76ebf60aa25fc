//! The 155-processor machine built on P(4, GF(2)): one processor per line,
//! one bus per plane.

use crate::automorphism::{standard_matchings, Automorphism, MatchingPattern};
use crate::error::{Error, Result};
use crate::geometry::{ProjectiveSpace, Subspace};

/// Points of P(4, GF(2)).
pub const POINTS: usize = 31;
/// Lines (processors) and planes (buses) of P(4, GF(2)).
pub const LINES: usize = 155;
/// Frobenius order on P(4, GF(2)) labels.
pub const FROBENIUS: u32 = 5;

pub struct PgMachine {
    space: ProjectiveSpace,
    matchings: Vec<MatchingPattern>,
    line_of_pair: Vec<u32>,
    line_points: Vec<[u32; 3]>,
    plane_lines: Vec<Vec<u32>>,
    lines_through: Vec<Vec<u32>>,
    diag_copies: Vec<[u32; 5]>,
    diag_buses: Vec<[u32; 5]>,
    base_bus: Subspace,
}

impl PgMachine {
    pub fn new() -> Result<Self> {
        let space = ProjectiveSpace::with_order(4, 2, &[1, 2])?;
        let matchings = standard_matchings(&space)?;
        let lines = space.lines()?;
        let planes = space.planes()?;
        let mut line_of_pair = vec![u32::MAX; POINTS * POINTS];
        let mut line_points = Vec::with_capacity(LINES);
        let mut lines_through = vec![Vec::new(); POINTS];
        for (id, l) in lines.iter().enumerate() {
            let p = l.points();
            line_points.push([p[0], p[1], p[2]]);
            for &a in p {
                lines_through[a as usize].push(id as u32);
                for &b in p {
                    if a != b {
                        line_of_pair[a as usize * POINTS + b as usize] = id as u32;
                    }
                }
            }
        }
        let plane_lines = planes
            .iter()
            .map(|pl| {
                space
                    .lines_in(pl)
                    .and_then(|ls| ls.iter().map(|l| space.id_of(l).map(|i| i as u32)).collect())
            })
            .collect::<Result<Vec<Vec<u32>>>>()?;

        let l0 = space.line_through(0, 1)?;
        let base_bus = find_diagonal_bus(&space, &l0)?;
        let mut diag_copies = Vec::with_capacity(POINTS);
        let mut diag_buses = Vec::with_capacity(POINTS);
        for i in 0..POINTS as u32 {
            let mut copies = [0u32; 5];
            let mut buses = [0u32; 5];
            for a in 0..FROBENIUS {
                let g = Automorphism::new(a, i);
                copies[a as usize] = space.id_of(&g.apply(&space, &l0))? as u32;
                buses[a as usize] = space.id_of(&g.apply(&space, &base_bus))? as u32;
            }
            diag_copies.push(copies);
            diag_buses.push(buses);
        }
        Ok(PgMachine {
            space,
            matchings,
            line_of_pair,
            line_points,
            plane_lines,
            lines_through,
            diag_copies,
            diag_buses,
            base_bus,
        })
    }

    pub fn space(&self) -> &ProjectiveSpace {
        &self.space
    }

    /// `S_q` for `q` in `1..=7`.
    pub fn matching(&self, q: usize) -> &MatchingPattern {
        &self.matchings[q - 1]
    }

    pub fn line(&self, id: u32) -> &Subspace {
        &self.space.lines().expect("lines enumerated")[id as usize]
    }

    pub fn plane(&self, id: u32) -> &Subspace {
        &self.space.planes().expect("planes enumerated")[id as usize]
    }

    pub fn line_points(&self, id: u32) -> [u32; 3] {
        self.line_points[id as usize]
    }

    pub fn line_contains(&self, id: u32, p: u32) -> bool {
        self.line_points[id as usize].contains(&p)
    }

    /// Lines of a plane.
    pub fn plane_lines(&self, plane: u32) -> &[u32] {
        &self.plane_lines[plane as usize]
    }

    pub fn plane_has_line(&self, plane: u32, line: u32) -> bool {
        self.plane_lines[plane as usize].contains(&line)
    }

    /// Line through two distinct points.
    pub fn line_id(&self, a: u32, b: u32) -> u32 {
        debug_assert_ne!(a, b);
        self.line_of_pair[a as usize * POINTS + b as usize]
    }

    pub fn lines_through(&self, p: u32) -> &[u32] {
        &self.lines_through[p as usize]
    }

    /// The five lines holding copies of diagonal block `(p, p)`.
    pub fn diag_copies(&self, p: u32) -> &[u32; 5] {
        &self.diag_copies[p as usize]
    }

    /// Bus used by each diagonal copy of point `p` to reach the other lines
    /// through `p`, aligned with [`Self::diag_copies`].
    pub fn diag_buses(&self, p: u32) -> &[u32; 5] {
        &self.diag_buses[p as usize]
    }

    /// The plane through line (0,1,18) whose Frobenius images split the
    /// lines through point 0 into five disjoint triples.
    pub fn base_bus(&self) -> &Subspace {
        &self.base_bus
    }

    /// Memory map: lines storing block `(j, k)`, indices taken mod 31.
    /// Diagonal blocks have five copies; an off-diagonal block whose indices
    /// fall on the same point is kept by all 15 lines through that point.
    pub fn memory_map(&self, j: usize, k: usize) -> Vec<u32> {
        let (pj, pk) = ((j % POINTS) as u32, (k % POINTS) as u32);
        if j == k {
            self.diag_copies(pj).to_vec()
        } else if pj == pk {
            self.lines_through(pj).to_vec()
        } else {
            vec![self.line_id(pj, pk)]
        }
    }

    /// Scheme II compute map for triplet `(i, j, k)`.
    pub fn compute_map_c2(&self, i: usize, j: usize, k: usize) -> Vec<u32> {
        if j == i {
            self.memory_map(i, k)
        } else if k == i {
            self.memory_map(j, i)
        } else {
            self.memory_map(j, k)
        }
    }

    /// Scheme I compute map: trailing updates of non-collinear point triples
    /// go to the line matched by `S_1` to their plane; everything else stays
    /// with the block's memory.
    pub fn compute_map_c1(&self, i: usize, j: usize, k: usize) -> Vec<u32> {
        let (pi, pj, pk) = ((i % POINTS) as u32, (j % POINTS) as u32, (k % POINTS) as u32);
        if j == i || k == i || pj == pk || pi == pj || pi == pk || self.line_contains(self.line_id(pj, pk), pi) {
            return self.compute_map_c2(i, j, k);
        }
        let plane = self.space.plane_through(pi, pj, pk).expect("non-collinear");
        let pid = self.space.id_of(&plane).expect("plane enumerated");
        vec![self.matching(1).line_of_plane(pid) as u32]
    }

    /// Plane spanned by point `p` and a line not through it.
    pub fn span_point_line(&self, p: u32, line: u32) -> Result<u32> {
        let [a, b, _] = self.line_points(line);
        let plane = self.space.plane_through(p, a, b)?;
        Ok(self.space.id_of(&plane)? as u32)
    }

    /// Processors joined by direct links: `ℓ` is linked to
    /// `S_q(S_1⁻¹(ℓ))` for `q = 2..7`, in both directions.
    pub fn link_graph(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); LINES];
        for l in 0..LINES {
            let plane = self.matching(1).plane_of_line(l);
            for q in 2..=7 {
                let m = self.matching(q).line_of_plane(plane);
                if m != l {
                    adj[l].push(m as u32);
                    adj[m].push(l as u32);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

fn find_diagonal_bus(space: &ProjectiveSpace, l0: &Subspace) -> Result<Subspace> {
    let through_zero: Vec<&Subspace> = space.lines()?.iter().filter(|l| l.contains(0)).collect();
    for plane in space.planes()?.iter().filter(|p| l0.points().iter().all(|&x| p.contains(x))) {
        let mut hit = vec![0u8; through_zero.len()];
        for a in 0..FROBENIUS {
            let img = Automorphism::new(a, 0).apply(space, plane);
            for (t, l) in through_zero.iter().enumerate() {
                if l.points().iter().all(|&x| img.contains(x)) {
                    hit[t] += 1;
                }
            }
        }
        if hit.iter().all(|&h| h == 1) {
            return Ok(plane.clone());
        }
    }
    Err(Error::Invariant("no plane through (0,1,18) splits the lines through 0".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(dim: u32, pts: &[u32]) -> Subspace {
        Subspace::new(dim, pts.to_vec())
    }

    #[test]
    fn diagonal_copies_of_zero() {
        let m = PgMachine::new().unwrap();
        let copies: Vec<Subspace> = m.memory_map(0, 0).iter().map(|&l| m.line(l).clone()).collect();
        assert_eq!(
            copies,
            vec![
                sub(1, &[0, 1, 18]),
                sub(1, &[0, 2, 5]),
                sub(1, &[0, 4, 10]),
                sub(1, &[0, 8, 20]),
                sub(1, &[0, 16, 9]),
            ]
        );
    }

    #[test]
    fn diagonal_buses_of_zero() {
        let m = PgMachine::new().unwrap();
        let buses: Vec<Subspace> = m.diag_buses(0).iter().map(|&p| m.plane(p).clone()).collect();
        assert_eq!(
            buses,
            vec![
                sub(2, &[13, 14, 15, 18, 24, 0, 1]),
                sub(2, &[26, 28, 30, 5, 17, 0, 2]),
                sub(2, &[21, 25, 29, 10, 3, 0, 4]),
                sub(2, &[11, 19, 27, 20, 6, 0, 8]),
                sub(2, &[22, 7, 23, 9, 12, 0, 16]),
            ]
        );
    }

    #[test]
    fn every_line_is_one_diagonal_copy() {
        let m = PgMachine::new().unwrap();
        let mut count = vec![0; LINES];
        for p in 0..POINTS as u32 {
            for &l in m.diag_copies(p) {
                assert!(m.line_contains(l, p));
                count[l as usize] += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 1));
    }

    #[test]
    fn maps_reduce_mod_31() {
        let m = PgMachine::new().unwrap();
        assert_eq!(m.memory_map(6, 7), vec![m.line_id(6, 7)]);
        assert_eq!(m.memory_map(32, 32), m.memory_map(1, 1));
        let wide = m.memory_map(32, 1);
        assert_eq!(wide.len(), 15);
        assert!(m.memory_map(1, 1).iter().all(|l| wide.contains(l)));
        assert_eq!(m.memory_map(33, 6), m.memory_map(2, 6));
        assert_eq!(m.compute_map_c2(0, 6, 7), vec![m.line_id(6, 7)]);
        assert_eq!(m.compute_map_c2(0, 5, 5), m.diag_copies(5).to_vec());
        assert_eq!(m.compute_map_c2(0, 3, 0), vec![m.line_id(0, 3)]);
    }

    #[test]
    fn scheme_one_maps() {
        let m = PgMachine::new().unwrap();
        let l01 = m.line_id(0, 1);
        let plane = m.matching(1).plane_of_line(l01 as usize);
        // row/column updates stay on the line joining the two points
        assert_eq!(m.compute_map_c1(0, 1, 0), vec![l01]);
        assert_eq!(m.matching(1).line_of_plane(plane) as u32, l01);
        // a non-collinear triple goes to S_1 of its plane
        let t = m.compute_map_c1(0, 1, 2);
        let p012 = m.space().id_of(&m.space().plane_through(0, 1, 2).unwrap()).unwrap();
        assert_eq!(t, vec![m.matching(1).line_of_plane(p012) as u32]);
        assert_eq!(t, vec![l01]);
        // collinear triple falls back to the block's line
        assert_eq!(m.compute_map_c1(0, 1, 18), vec![m.line_id(1, 18)]);
    }

    #[test]
    fn matched_planes_cover_each_line() {
        let m = PgMachine::new().unwrap();
        for l in 0..LINES {
            let mut planes: Vec<usize> = (1..=7).map(|q| m.matching(q).plane_of_line(l)).collect();
            assert!(planes.iter().all(|&p| m.plane_has_line(p as u32, l as u32)));
            planes.sort_unstable();
            planes.dedup();
            assert_eq!(planes.len(), 7);
        }
    }

    #[test]
    fn link_graph_degree_twelve() {
        let m = PgMachine::new().unwrap();
        let adj = m.link_graph();
        assert!(adj.iter().all(|a| a.len() == 12), "{:?}", adj.iter().map(|a| a.len()).collect::<Vec<_>>());
    }
}
