//! Finite projective spaces P(d, GF(q)).
//!
//! The space is realised inside the extension field GF(q^{d+1}), viewed as a
//! (d+1)-dimensional vector space over GF(q). With `α` primitive in the big
//! field, the nonzero scalars of GF(q) are the powers `α^{m·n}` where
//! `n = (q^{d+1}-1)/(q-1)` is the number of points, so every point has a unique
//! representative `α^i` with `0 <= i < n`. The label of a point is that `i`.
//! Multiplying by `α` maps point `i` to `i + 1 mod n`, which is why shifting
//! labels is a collineation.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::galois::{prime_power, FieldElement, FieldSpec, GaloisField};

/// Point label in `0..point_count`.
pub type PointIndex = u32;

/// Upper bound on the total number of point entries stored across all
/// enumerated subspace tables.
pub const MAX_TABLE_ENTRIES: u64 = 50_000_000;

/// Number of `l`-dimensional subspaces of `P(n, GF(s))`, i.e. the Gaussian
/// binomial coefficient `[n+1, l+1]_s`.
pub fn phi(n: u32, l: u32, s: u64) -> Result<u64> {
    if l > n {
        return invalid(format!("phi: need l <= n, got l={l}, n={n}"));
    }
    if s < 2 {
        return invalid(format!("phi: need s >= 2, got {s}"));
    }
    let overflow = || Error::ResourceBound(format!("phi({n},{l},{s}) overflows"));
    let pow_minus_one = |e: u32| -> Result<u128> {
        (s as u128)
            .checked_pow(e)
            .map(|v| v - 1)
            .ok_or_else(overflow)
    };
    // [n+1, i+1]_s = [n+1, i]_s * (s^{n+1-i} - 1) / (s^{i+1} - 1), integral at every step
    let mut acc: u128 = 1;
    for i in 0..=l {
        acc = acc
            .checked_mul(pow_minus_one(n + 1 - i)?)
            .ok_or_else(overflow)?
            / pow_minus_one(i + 1)?;
    }
    u64::try_from(acc).map_err(|_| overflow())
}

/// A projective subspace, stored as its sorted point set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Subspace {
    dim: u32,
    points: Vec<PointIndex>,
}

impl Subspace {
    /// Builds a subspace from points in any order. No closure check is made;
    /// use [`ProjectiveSpace::is_subspace`] for that.
    pub fn new(dim: u32, mut points: Vec<PointIndex>) -> Self {
        points.sort_unstable();
        points.dedup();
        Subspace { dim, points }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn points(&self) -> &[PointIndex] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: PointIndex) -> bool {
        self.points.binary_search(&p).is_ok()
    }

    /// Applies a point permutation and re-canonicalises.
    pub fn map(&self, f: impl Fn(PointIndex) -> PointIndex) -> Subspace {
        Subspace::new(self.dim, self.points.iter().map(|&p| f(p)).collect())
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", pts.join(","))
    }
}

/// Whether every point of `a` lies in `b` (or vice versa when `a` is the
/// larger one).
pub fn incident(a: &Subspace, b: &Subspace) -> bool {
    let (small, big) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.points.iter().all(|&p| big.contains(p))
}

#[derive(Clone, Debug)]
struct Table {
    subspaces: Vec<Subspace>,
    index: HashMap<Vec<PointIndex>, usize>,
}

/// `P(d, GF(q))` with optional enumerated subspace tables.
#[derive(Clone, Debug)]
pub struct ProjectiveSpace {
    d: u32,
    base: FieldSpec,
    q: u32,
    field: GaloisField,
    n: u32,
    /// Exponents `m·n` of the nonzero base-field scalars inside the big field.
    scalar_logs: Vec<u32>,
    tables: Vec<Option<Table>>,
}

impl ProjectiveSpace {
    /// Builds `P(d, GF(q))` where `base` describes GF(q), enumerating the
    /// subspaces of every dimension listed in `dims`.
    pub fn build(d: u32, base: &FieldSpec, dims: &[u32]) -> Result<Self> {
        if d == 0 {
            return invalid("projective dimension must be >= 1");
        }
        if let Some(&l) = dims.iter().find(|&&l| l > d) {
            return invalid(format!("requested dimension {l} exceeds d = {d}"));
        }
        let q = base.order();
        let big_k = base.k().checked_mul(d + 1).ok_or_else(|| {
            Error::ResourceBound(format!("P({d}, GF({q})) too large"))
        })?;
        let field = GaloisField::with_order(base.p(), big_k)?;
        let group = field.group_order();
        let n = group / (q - 1);
        let scalar_logs = (0..q - 1).map(|m| m * n).collect();
        let mut space = ProjectiveSpace {
            d,
            base: base.clone(),
            q,
            field,
            n,
            scalar_logs,
            tables: vec![None; d as usize + 1],
        };
        let mut budget = 0u64;
        for &l in dims {
            let count = phi(d, l, q as u64)?;
            budget += count * space.subspace_size(l) as u64;
        }
        if budget > MAX_TABLE_ENTRIES {
            return Err(Error::ResourceBound(format!(
                "P({d}, GF({q})) tables need {budget} entries (limit {MAX_TABLE_ENTRIES})"
            )));
        }
        let mut sorted_dims = dims.to_vec();
        sorted_dims.sort_unstable();
        sorted_dims.dedup();
        for l in sorted_dims {
            let subspaces = space.enumerate(l)?;
            let expected = phi(d, l, q as u64)?;
            if subspaces.len() as u64 != expected {
                return Err(Error::Invariant(format!(
                    "enumerated {} subspaces of dim {l}, expected {expected}",
                    subspaces.len()
                )));
            }
            let index = subspaces
                .iter()
                .enumerate()
                .map(|(i, s)| (s.points.clone(), i))
                .collect();
            space.tables[l as usize] = Some(Table { subspaces, index });
        }
        Ok(space)
    }

    /// `P(d, GF(q))` for a prime power `q`, with the default field polynomial.
    pub fn with_order(d: u32, q: u64, dims: &[u32]) -> Result<Self> {
        let (p, k) = prime_power(q)
            .ok_or_else(|| Error::InvalidArgument(format!("{q} is not a prime power")))?;
        Self::build(d, &FieldSpec::new(p, k)?, dims)
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    /// Order `q` of the base field.
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn base_field(&self) -> &FieldSpec {
        &self.base
    }

    /// The extension field the points live in.
    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    /// Number of points `P(d)`.
    pub fn point_count(&self) -> u32 {
        self.n
    }

    /// Number of points in an `l`-dimensional subspace.
    pub fn subspace_size(&self, l: u32) -> u32 {
        let q = self.q as u64;
        ((q.pow(l + 1) - 1) / (q - 1)) as u32
    }

    /// Point represented by a nonzero vector.
    pub fn point_of(&self, v: FieldElement) -> Result<PointIndex> {
        self.field
            .log(v)
            .map(|e| e % self.n)
            .ok_or_else(|| Error::Domain("the zero vector is not a point".into()))
    }

    /// Canonical representative vector `α^i` of point `i`.
    pub fn vector_of(&self, i: PointIndex) -> FieldElement {
        self.field.alpha_pow(i as i64)
    }

    fn check_point(&self, i: PointIndex) -> Result<()> {
        if i >= self.n {
            return invalid(format!("point {i} out of range 0..{}", self.n));
        }
        Ok(())
    }

    /// Points of the span of a subspace's points with one extra point. The
    /// input must already be closed.
    fn extend(&self, closed: &[PointIndex], x: PointIndex) -> Vec<PointIndex> {
        let mut out: Vec<PointIndex> = Vec::with_capacity(closed.len() * self.q as usize + 1);
        out.extend_from_slice(closed);
        out.push(x);
        for &s in closed {
            for &m in &self.scalar_logs {
                // c·α^x + α^s with c = α^m
                let v = self
                    .field
                    .add(self.field.alpha_pow(m as i64 + x as i64), self.vector_of(s));
                let e = self.field.log(v).expect("independent points never cancel");
                out.push(e % self.n);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Span of an arbitrary point set, returned with its dimension.
    pub fn span(&self, points: &[PointIndex]) -> Result<Subspace> {
        let mut closed: Vec<PointIndex> = Vec::new();
        let mut dim: i64 = -1;
        for &x in points {
            self.check_point(x)?;
            if closed.binary_search(&x).is_ok() {
                continue;
            }
            closed = self.extend(&closed, x);
            dim += 1;
        }
        if dim < 0 {
            return invalid("span of an empty point set");
        }
        Ok(Subspace::new(dim as u32, closed))
    }

    /// Whether a point set is a subspace of the given dimension.
    pub fn is_subspace(&self, s: &Subspace) -> bool {
        if s.len() != self.subspace_size(s.dim) as usize {
            return false;
        }
        match self.span(&s.points) {
            Ok(sp) => sp.points == s.points,
            Err(_) => false,
        }
    }

    fn enumerate(&self, l: u32) -> Result<Vec<Subspace>> {
        if l == 0 {
            return Ok((0..self.n).map(|i| Subspace::new(0, vec![i])).collect());
        }
        // Subspaces through point 0, grown one dimension at a time.
        let mut through_zero: HashSet<Vec<PointIndex>> = HashSet::new();
        through_zero.insert(vec![0]);
        for _ in 0..l {
            let mut next = HashSet::new();
            for s in &through_zero {
                let mut covered: HashSet<PointIndex> = HashSet::new();
                for x in 0..self.n {
                    if s.binary_search(&x).is_ok() || covered.contains(&x) {
                        continue;
                    }
                    let ext = self.extend(s, x);
                    covered.extend(ext.iter().copied());
                    next.insert(ext);
                }
            }
            through_zero = next;
        }
        // The shift i -> i+1 is transitive on points, so every subspace is a
        // shift of one through 0.
        let mut all: HashSet<Vec<PointIndex>> = HashSet::new();
        for s in &through_zero {
            for a in 0..self.n {
                let mut shifted: Vec<PointIndex> =
                    s.iter().map(|&p| (p + a) % self.n).collect();
                shifted.sort_unstable();
                all.insert(shifted);
            }
        }
        let mut out: Vec<Subspace> = all.into_iter().map(|p| Subspace { dim: l, points: p }).collect();
        out.sort_unstable();
        Ok(out)
    }

    fn table(&self, l: u32) -> Result<&Table> {
        self.tables
            .get(l as usize)
            .and_then(|t| t.as_ref())
            .ok_or_else(|| Error::InvalidArgument(format!("subspaces of dimension {l} were not enumerated")))
    }

    /// All enumerated `l`-dimensional subspaces in canonical order.
    pub fn subspaces(&self, l: u32) -> Result<&[Subspace]> {
        Ok(&self.table(l)?.subspaces)
    }

    /// Table position of a subspace.
    pub fn id_of(&self, s: &Subspace) -> Result<usize> {
        self.table(s.dim)?
            .index
            .get(&s.points)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("{s} is not a subspace of dimension {}", s.dim)))
    }

    pub fn lines(&self) -> Result<&[Subspace]> {
        self.subspaces(1)
    }

    pub fn planes(&self) -> Result<&[Subspace]> {
        self.subspaces(2)
    }

    /// The unique line through two distinct points.
    pub fn line_through(&self, i: PointIndex, j: PointIndex) -> Result<Subspace> {
        self.check_point(i)?;
        self.check_point(j)?;
        if i == j {
            return Err(Error::Degenerate(format!("line through point {i} and itself")));
        }
        Ok(Subspace::new(1, self.extend(&[i], j)))
    }

    /// Intersection point of two distinct lines, if any.
    pub fn meet_of_lines(&self, l1: &Subspace, l2: &Subspace) -> Result<Option<PointIndex>> {
        if l1.dim != 1 || l2.dim != 1 {
            return invalid("meet_of_lines expects two lines");
        }
        if l1 == l2 {
            return Err(Error::Degenerate(format!("meet of line {l1} with itself")));
        }
        Ok(l1.points.iter().copied().find(|&p| l2.contains(p)))
    }

    /// The unique plane through three non-collinear points.
    pub fn plane_through(&self, i: PointIndex, j: PointIndex, k: PointIndex) -> Result<Subspace> {
        let line = self.line_through(i, j)?;
        self.check_point(k)?;
        if line.contains(k) {
            return Err(Error::Degenerate(format!("points {i}, {j}, {k} are collinear")));
        }
        Ok(Subspace::new(2, self.extend(&line.points, k)))
    }

    /// Lines of a plane (or any subspace) in canonical order.
    pub fn lines_in(&self, s: &Subspace) -> Result<Vec<Subspace>> {
        let mut out: HashSet<Subspace> = HashSet::new();
        for (a, &i) in s.points.iter().enumerate() {
            for &j in &s.points[a + 1..] {
                out.insert(self.line_through(i, j)?);
            }
        }
        let mut v: Vec<Subspace> = out.into_iter().collect();
        v.sort_unstable();
        Ok(v)
    }

    /// The lines of a projective plane labelled cyclically: line `k` is the
    /// difference set `D = line_through(0, 1)` translated by `k + (n-1)/2`,
    /// with points listed in the order of the sorted `D`.
    pub fn cyclic_lines(&self) -> Result<Vec<Vec<PointIndex>>> {
        if self.d != 2 {
            return invalid("cyclic line labels are defined for projective planes only");
        }
        let base = self.line_through(0, 1)?;
        let n = self.n;
        let offset = (n - 1) / 2;
        Ok((0..n)
            .map(|k| base.points.iter().map(|&x| (x + k + offset) % n).collect())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pg(d: u32, q: u64, dims: &[u32]) -> ProjectiveSpace {
        ProjectiveSpace::with_order(d, q, dims).unwrap()
    }

    fn sub(dim: u32, pts: &[u32]) -> Subspace {
        Subspace::new(dim, pts.to_vec())
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(4, 1, 2).unwrap(), 155);
        assert_eq!(phi(3, 1, 2).unwrap(), 35);
        assert_eq!(phi(4, 2, 2).unwrap(), 155);
        assert_eq!(phi(2, 0, 3).unwrap(), 13);
        for (n, s) in [(1, 2), (3, 5), (6, 7)] {
            assert_eq!(phi(n, 0, s).unwrap(), (s.pow(n + 1) - 1) / (s - 1));
            assert_eq!(phi(n, n, s).unwrap(), 1);
        }
        assert!(phi(2, 3, 2).is_err());
        assert!(phi(2, 1, 1).is_err());
        assert!(matches!(phi(60, 30, 101), Err(Error::ResourceBound(_))));
    }

    #[test]
    fn fano_plane() {
        let s = pg(2, 2, &[0, 1]);
        assert_eq!(s.point_count(), 7);
        let lines: Vec<Vec<u32>> = s.lines().unwrap().iter().map(|l| l.points().to_vec()).collect();
        let mut expected = vec![
            vec![0, 1, 3],
            vec![0, 2, 6],
            vec![1, 2, 4],
            vec![0, 4, 5],
            vec![1, 5, 6],
            vec![2, 3, 5],
            vec![3, 4, 6],
        ];
        expected.sort();
        assert_eq!(lines, expected);
    }

    #[test]
    fn projective_line_is_one_line() {
        let s = pg(1, 2, &[0, 1]);
        assert_eq!(s.point_count(), 3);
        assert_eq!(s.lines().unwrap(), &[sub(1, &[0, 1, 2])]);
    }

    #[test]
    fn pg4_known_subspaces() {
        let s = pg(4, 2, &[]);
        assert_eq!(s.line_through(0, 1).unwrap(), sub(1, &[0, 1, 18]));
        assert_eq!(s.plane_through(0, 1, 2).unwrap(), sub(2, &[0, 1, 2, 5, 11, 18, 19]));
        assert!(matches!(s.plane_through(0, 1, 18), Err(Error::Degenerate(_))));
        assert!(matches!(s.line_through(3, 3), Err(Error::Degenerate(_))));
        assert!(incident(&sub(1, &[0, 1, 18]), &sub(2, &[13, 14, 15, 18, 24, 0, 1])));
    }

    #[test]
    fn pg2_gf3_lines_and_meets() {
        let s = pg(2, 3, &[0, 1]);
        assert_eq!(s.point_count(), 13);
        assert_eq!(s.line_through(6, 7).unwrap(), sub(1, &[2, 6, 7, 9]));
        let cyc = s.cyclic_lines().unwrap();
        assert_eq!(cyc[0], vec![6, 7, 9, 2]);
        let l2 = sub(1, &cyc[2]);
        let l6 = sub(1, &cyc[6]);
        assert_eq!(s.meet_of_lines(&l2, &l6).unwrap(), Some(8));
        assert!(!incident(&sub(0, &[8]), &sub(1, &[2, 6, 7, 9])));
        assert!(cyc[12].contains(&1) && cyc[12].contains(&5));
        for line in &cyc {
            assert!(s.id_of(&sub(1, line)).is_ok());
        }
    }

    #[test]
    fn pg4_skew_lines_have_no_meet() {
        let s = pg(4, 2, &[1]);
        let lines = s.lines().unwrap();
        let l0 = &lines[0];
        let skew = lines.iter().find(|l| l.points().iter().all(|&p| !l0.contains(p))).unwrap();
        assert_eq!(s.meet_of_lines(l0, skew).unwrap(), None);
    }

    #[test]
    fn line_through_is_symmetric_and_contains_endpoints() {
        let s = pg(3, 3, &[]);
        for i in 0..s.point_count() {
            for j in 0..s.point_count() {
                if i == j {
                    continue;
                }
                let l = s.line_through(i, j).unwrap();
                assert_eq!(l, s.line_through(j, i).unwrap());
                assert!(l.contains(i) && l.contains(j));
                assert_eq!(l.len(), 4);
            }
        }
    }

    #[test]
    fn tables_are_closed_and_counted() {
        for (d, q) in [(2u32, 4u64), (3, 2), (2, 5)] {
            let s = pg(d, q, &[0, 1, 2]);
            for l in 0..=2 {
                let t = s.subspaces(l).unwrap();
                assert_eq!(t.len() as u64, phi(d, l, q).unwrap());
                for sp in t.iter().take(50) {
                    assert!(s.is_subspace(sp), "{sp} not closed in P({d},{q})");
                }
            }
        }
    }

    #[test]
    fn plane_duality_counts() {
        for q in [2u64, 3, 4, 5, 7] {
            let s = pg(2, q, &[1]);
            let n = s.point_count() as usize;
            let lines = s.lines().unwrap();
            assert_eq!(lines.len(), n);
            let mut on = vec![0usize; n];
            for l in lines {
                assert_eq!(l.len() as u64, q + 1);
                for &p in l.points() {
                    on[p as usize] += 1;
                }
            }
            assert!(on.iter().all(|&c| c as u64 == q + 1));
        }
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(ProjectiveSpace::with_order(2, 6, &[]).is_err());
        assert!(ProjectiveSpace::with_order(2, 2, &[3]).is_err());
        assert!(matches!(
            ProjectiveSpace::with_order(4, 16, &[1, 2]),
            Err(Error::ResourceBound(_))
        ));
        let s = pg(2, 2, &[]);
        assert!(s.lines().is_err());
        assert!(s.line_through(0, 7).is_err());
    }
}
