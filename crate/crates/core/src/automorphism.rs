//! Shift and Frobenius collineations, and plane-to-line perfect matchings
//! generated from them.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{incident, PointIndex, ProjectiveSpace, Subspace};

/// The collineation `i ↦ (i·p^frob + shift) mod n`: Frobenius applied first,
/// then the shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Automorphism {
    pub frob: u32,
    pub shift: u32,
}

impl Automorphism {
    pub const IDENTITY: Automorphism = Automorphism { frob: 0, shift: 0 };

    pub fn new(frob: u32, shift: u32) -> Self {
        Automorphism { frob, shift }
    }

    pub fn apply_point(&self, space: &ProjectiveSpace, i: PointIndex) -> PointIndex {
        let n = space.point_count() as u64;
        let p = space.base_field().p() as u64;
        let mut x = i as u64 % n;
        for _ in 0..self.frob {
            x = x * p % n;
        }
        ((x + self.shift as u64) % n) as PointIndex
    }

    pub fn apply(&self, space: &ProjectiveSpace, s: &Subspace) -> Subspace {
        s.map(|i| self.apply_point(space, i))
    }
}

/// Order of the Frobenius collineation on labels, `k(d+1)` for `q = p^k`.
pub fn frobenius_order(space: &ProjectiveSpace) -> u32 {
    space.field().degree()
}

/// Every composite `shift^a ∘ frob^b`, frob-major.
pub fn all_automorphisms(space: &ProjectiveSpace) -> Vec<Automorphism> {
    let n = space.point_count();
    (0..frobenius_order(space))
        .flat_map(|b| (0..n).map(move |a| Automorphism::new(b, a)))
        .collect()
}

/// Images of `seed` under the given automorphisms, deduplicated and sorted.
pub fn orbit_under(space: &ProjectiveSpace, seed: &Subspace, group: &[Automorphism]) -> Vec<Subspace> {
    let set: BTreeSet<Subspace> = group.iter().map(|g| g.apply(space, seed)).collect();
    set.into_iter().collect()
}

/// Orbit of `seed` under all shift/Frobenius composites.
pub fn orbit(space: &ProjectiveSpace, seed: &Subspace) -> Vec<Subspace> {
    orbit_under(space, seed, &all_automorphisms(space))
}

/// Orbit of `seed` under shifts alone.
pub fn shift_orbit(space: &ProjectiveSpace, seed: &Subspace) -> Vec<Subspace> {
    let group: Vec<Automorphism> = (0..space.point_count()).map(|a| Automorphism::new(0, a)).collect();
    orbit_under(space, seed, &group)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingDirection {
    PlanesToLines,
    LinesToPlanes,
}

/// A bijection between planes and lines with every matched line contained in
/// its plane. Ids index the space's plane and line tables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchingPattern {
    q: u32,
    direction: MatchingDirection,
    map: Vec<u32>,
    inverse: Vec<u32>,
}

impl MatchingPattern {
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn direction(&self) -> MatchingDirection {
        self.direction
    }

    /// Image of a domain id (a plane id for `S_q`, a line id for `S_q⁻¹`).
    pub fn image(&self, id: usize) -> usize {
        self.map[id] as usize
    }

    pub fn preimage(&self, id: usize) -> usize {
        self.inverse[id] as usize
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// `(domain id, image id)` pairs in domain order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.map.iter().enumerate().map(|(i, &j)| (i, j as usize))
    }

    pub fn invert(&self) -> MatchingPattern {
        MatchingPattern {
            q: self.q,
            direction: match self.direction {
                MatchingDirection::PlanesToLines => MatchingDirection::LinesToPlanes,
                MatchingDirection::LinesToPlanes => MatchingDirection::PlanesToLines,
            },
            map: self.inverse.clone(),
            inverse: self.map.clone(),
        }
    }

    /// Line matched to a plane, whichever direction this pattern is stored in.
    pub fn line_of_plane(&self, plane: usize) -> usize {
        match self.direction {
            MatchingDirection::PlanesToLines => self.image(plane),
            MatchingDirection::LinesToPlanes => self.preimage(plane),
        }
    }

    /// Plane matched to a line.
    pub fn plane_of_line(&self, line: usize) -> usize {
        match self.direction {
            MatchingDirection::PlanesToLines => self.preimage(line),
            MatchingDirection::LinesToPlanes => self.image(line),
        }
    }
}

/// Builds `S_q` by transporting `seed_plane → seed_line` along every
/// automorphism. Fails unless the result is a well-defined bijection.
pub fn build_matching(
    space: &ProjectiveSpace,
    q: u32,
    seed_plane: &Subspace,
    seed_line: &Subspace,
) -> Result<MatchingPattern> {
    if seed_plane.dim() != 2 || seed_line.dim() != 1 {
        return invalid("matching seeds must be a plane and a line");
    }
    if !incident(seed_line, seed_plane) {
        return invalid(format!("seed line {seed_line} is not contained in seed plane {seed_plane}"));
    }
    let planes = space.planes()?;
    let lines = space.lines()?;
    if planes.len() != lines.len() {
        return Err(Error::Invariant(format!(
            "{} planes vs {} lines: no perfect matching exists",
            planes.len(),
            lines.len()
        )));
    }
    const UNSET: u32 = u32::MAX;
    let mut map = vec![UNSET; planes.len()];
    for g in all_automorphisms(space) {
        let pi = space.id_of(&g.apply(space, seed_plane))?;
        let li = space.id_of(&g.apply(space, seed_line))? as u32;
        if map[pi] != UNSET && map[pi] != li {
            return Err(Error::Invariant(format!(
                "plane {} would be matched to two lines",
                planes[pi]
            )));
        }
        map[pi] = li;
    }
    if map.contains(&UNSET) {
        return Err(Error::Invariant("seed plane orbit does not cover every plane".into()));
    }
    let mut inverse = vec![UNSET; lines.len()];
    for (pi, &li) in map.iter().enumerate() {
        if inverse[li as usize] != UNSET {
            return Err(Error::Invariant(format!("line {} matched twice", lines[li as usize])));
        }
        inverse[li as usize] = pi as u32;
    }
    Ok(MatchingPattern {
        q,
        direction: MatchingDirection::PlanesToLines,
        map,
        inverse,
    })
}

/// The seed plane `plane_through(0,1,2)` and its lines in matching order:
/// `line_through(0,1)` first, then the remaining lines in canonical order.
pub fn matching_seeds(space: &ProjectiveSpace) -> Result<(Subspace, Vec<Subspace>)> {
    let plane = space.plane_through(0, 1, 2)?;
    let first = space.line_through(0, 1)?;
    let mut seeds = vec![first.clone()];
    seeds.extend(space.lines_in(&plane)?.into_iter().filter(|l| *l != first));
    Ok((plane, seeds))
}

/// `S_1, …, S_m` where `m` is the number of lines per plane.
pub fn standard_matchings(space: &ProjectiveSpace) -> Result<Vec<MatchingPattern>> {
    let (plane, seeds) = matching_seeds(space)?;
    seeds
        .iter()
        .enumerate()
        .map(|(q, line)| build_matching(space, q as u32 + 1, &plane, line))
        .collect()
}
