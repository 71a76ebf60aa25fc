//! Arithmetic in finite fields GF(p^k).
//!
//! Elements are stored as packed base-`p` coefficient vectors over the
//! polynomial basis `1, α, …, α^{k-1}`, where `α` is a root of the field's
//! primitive polynomial. Multiplication goes through discrete-log tables, so
//! every nonzero element also has a canonical label: its exponent `e` with
//! `element = α^e`. Point labels of projective spaces are built on top of
//! these exponents.

use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Largest supported field size (number of elements).
pub const MAX_FIELD_ELEMENTS: u64 = 1 << 20;

/// Primitive polynomials pinned for small fields, as lower coefficients
/// `c_0..c_{k-1}` of `x^k + c_{k-1} x^{k-1} + … + c_0`.
///
/// Each entry is the lexicographically smallest primitive polynomial (ordering
/// by `Σ c_i p^i`), which is also what the fallback search produces. Pinning
/// them keeps point labelings stable even if the search order ever changes.
const PRIMITIVE_TABLE: &[(u32, &[u32])] = &[
    (2, &[1]),
    (2, &[1, 1]),
    (2, &[1, 1, 0]),
    (2, &[1, 1, 0, 0]),
    (2, &[1, 0, 1, 0, 0]),
    (2, &[1, 1, 0, 0, 0, 0]),
    (2, &[1, 1, 0, 0, 0, 0, 0]),
    (2, &[1, 0, 1, 1, 1, 0, 0, 0]),
    (2, &[1, 0, 0, 0, 1, 0, 0, 0, 0]),
    (2, &[1, 0, 0, 1, 0, 0, 0, 0, 0, 0]),
    (2, &[1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0]),
    (2, &[1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0]),
    (2, &[1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0]),
    (2, &[1, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0]),
    (2, &[1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]),
    (2, &[1, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]),
    (3, &[1]),
    (3, &[2, 1]),
    (3, &[1, 2, 0]),
    (3, &[2, 1, 0, 0]),
    (3, &[1, 2, 0, 0, 0]),
    (3, &[2, 1, 0, 0, 0, 0]),
    (3, &[1, 2, 1, 0, 0, 0, 0]),
    (3, &[2, 0, 0, 1, 0, 0, 0, 0]),
    (3, &[1, 0, 1, 2, 0, 0, 0, 0, 0]),
    (3, &[2, 1, 0, 1, 0, 0, 0, 0, 0, 0]),
    (5, &[2]),
    (5, &[2, 1]),
    (5, &[2, 3, 0]),
    (5, &[2, 2, 1, 0]),
    (5, &[2, 4, 0, 0, 0]),
    (5, &[2, 1, 0, 0, 0, 0]),
    (7, &[2]),
    (7, &[3, 1]),
    (7, &[2, 3, 0]),
    (7, &[5, 3, 1, 0]),
    (7, &[4, 1, 0, 0, 0]),
];

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Decomposes `q = p^k` with `p` prime. Returns `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let factors = prime_factors(q);
    if factors.len() != 1 {
        return None;
    }
    let p = factors[0];
    let mut k = 0;
    let mut m = q;
    while m > 1 {
        m /= p;
        k += 1;
    }
    Some((p as u32, k))
}

/// Polynomial arithmetic modulo a monic `f` over Z_p, used only for
/// primitivity checks. Polynomials are coefficient vectors, low degree first.
struct PolyRing<'a> {
    p: u64,
    f: &'a [u64],
}

impl PolyRing<'_> {
    fn degree(&self) -> usize {
        self.f.len() - 1
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let k = self.degree();
        let mut r = vec![0u64; 2 * k];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + x * y) % self.p;
            }
        }
        for d in (k..2 * k).rev() {
            let c = r[d];
            if c == 0 {
                continue;
            }
            for (i, &fi) in self.f.iter().enumerate() {
                let idx = d - k + i;
                r[idx] = (r[idx] + self.p - (c * fi) % self.p) % self.p;
            }
        }
        r.truncate(k);
        r
    }

    /// `x^e mod f`.
    fn x_pow(&self, mut e: u64) -> Vec<u64> {
        let k = self.degree();
        let mut result = vec![0u64; k];
        result[0] = 1;
        let mut base = vec![0u64; k];
        if k == 1 {
            base[0] = (self.p - self.f[0] % self.p) % self.p;
        } else {
            base[1] = 1;
        }
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        result
    }
}

/// Whether the monic polynomial with lower coefficients `lower` is primitive
/// over Z_p, i.e. its root has multiplicative order exactly `p^k - 1`.
pub fn is_primitive(p: u32, lower: &[u32]) -> bool {
    let k = lower.len();
    if k == 0 || !is_prime(p as u64) || lower[0].is_multiple_of(p) {
        return false;
    }
    let p64 = p as u64;
    let mut f: Vec<u64> = lower.iter().map(|&c| (c % p) as u64).collect();
    f.push(1);
    let ring = PolyRing { p: p64, f: &f };
    let s = p64.pow(k as u32);
    let mut one = vec![0u64; k];
    one[0] = 1;
    if ring.x_pow(s - 1) != one {
        return false;
    }
    prime_factors(s - 1)
        .into_iter()
        .all(|r| ring.x_pow((s - 1) / r) != one)
}

fn search_primitive(p: u32, k: u32) -> Option<Vec<u32>> {
    let total = (p as u64).pow(k);
    (0..total).find_map(|v| {
        let mut lower = Vec::with_capacity(k as usize);
        let mut m = v;
        for _ in 0..k {
            lower.push((m % p as u64) as u32);
            m /= p as u64;
        }
        is_primitive(p, &lower).then_some(lower)
    })
}

/// Parameters of GF(p^k): characteristic, degree and primitive polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldSpec {
    p: u32,
    k: u32,
    /// Full coefficient vector of the monic primitive polynomial, low degree first.
    prim_poly: Vec<u32>,
}

impl FieldSpec {
    /// Picks a primitive polynomial from the built-in table, falling back to a
    /// lexicographic search verified by factoring `p^k - 1`.
    pub fn new(p: u32, k: u32) -> Result<Self> {
        Self::check_size(p, k)?;
        let lower = PRIMITIVE_TABLE
            .iter()
            .find(|(tp, c)| *tp == p && c.len() == k as usize)
            .map(|(_, c)| c.to_vec())
            .or_else(|| search_primitive(p, k))
            .ok_or_else(|| {
                Error::InvalidArgument(format!("no primitive polynomial found for GF({p}^{k})"))
            })?;
        let mut prim_poly = lower;
        prim_poly.push(1);
        Ok(FieldSpec { p, k, prim_poly })
    }

    /// Uses a caller-supplied polynomial given as full coefficients
    /// (low degree first, monic, length `k + 1`).
    pub fn with_polynomial(p: u32, coeffs: &[u32]) -> Result<Self> {
        if coeffs.len() < 2 || *coeffs.last().unwrap() != 1 {
            return invalid("polynomial must be monic with degree >= 1");
        }
        let k = (coeffs.len() - 1) as u32;
        Self::check_size(p, k)?;
        let lower = &coeffs[..coeffs.len() - 1];
        if lower.iter().any(|&c| c >= p) {
            return invalid(format!("coefficients must lie in Z_{p}"));
        }
        if !is_primitive(p, lower) {
            return invalid(format!("polynomial {coeffs:?} is not primitive over Z_{p}"));
        }
        Ok(FieldSpec {
            p,
            k,
            prim_poly: coeffs.to_vec(),
        })
    }

    fn check_size(p: u32, k: u32) -> Result<()> {
        if !is_prime(p as u64) {
            return invalid(format!("characteristic {p} is not prime"));
        }
        if k == 0 {
            return invalid("extension degree must be >= 1");
        }
        match (p as u64).checked_pow(k) {
            Some(s) if s <= MAX_FIELD_ELEMENTS => Ok(()),
            _ => Err(Error::ResourceBound(format!(
                "GF({p}^{k}) exceeds {MAX_FIELD_ELEMENTS} elements"
            ))),
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of field elements `s = p^k`.
    pub fn order(&self) -> u32 {
        self.p.pow(self.k)
    }

    pub fn prim_poly(&self) -> &[u32] {
        &self.prim_poly
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (deg, &c) in self.prim_poly.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let coef = if c == 1 && deg > 0 { String::new() } else { c.to_string() };
            terms.push(match deg {
                0 => coef,
                1 => format!("{coef}x"),
                _ => format!("{coef}x^{deg}"),
            });
        }
        write!(f, "GF({}^{}) mod {}", self.p, self.k, terms.join(" + "))
    }
}

/// A field element in packed polynomial-basis form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);

    /// The packed coefficient code `Σ c_i p^i`.
    pub fn code(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// GF(p^k) with precomputed exponent and log tables. Immutable after
/// construction and cheap to share behind an `Arc`.
#[derive(Clone, Debug)]
pub struct GaloisField {
    spec: FieldSpec,
    size: u32,
    /// `exp[e]` is the code of `α^e`, for `e` in `0..size-1`.
    exp: Vec<u32>,
    /// `log[code]` is the exponent of a nonzero element; `log[0]` is unused.
    log: Vec<u32>,
}

const NO_LOG: u32 = u32::MAX;

impl GaloisField {
    pub fn new(spec: FieldSpec) -> Result<Self> {
        let p = spec.p;
        let k = spec.k as usize;
        let size = spec.order();
        let group = size - 1;
        let mut exp = Vec::with_capacity(group as usize);
        let mut log = vec![NO_LOG; size as usize];
        let mut digits = vec![0u32; k];
        digits[0] = 1;
        for e in 0..group {
            let code = encode(&digits, p);
            if log[code as usize] != NO_LOG {
                return Err(Error::Invariant(format!(
                    "{spec}: α has order {e}, polynomial is not primitive"
                )));
            }
            log[code as usize] = e;
            exp.push(code);
            // multiply by α: shift up, then reduce x^k = -Σ c_i x^i
            let top = digits[k - 1];
            for i in (1..k).rev() {
                digits[i] = digits[i - 1];
            }
            digits[0] = 0;
            for (i, d) in digits.iter_mut().enumerate() {
                let c = spec.prim_poly[i];
                *d = (*d + p - (top * c) % p) % p;
            }
        }
        if encode(&digits, p) != 1 {
            return Err(Error::Invariant(format!("{spec}: α^(s-1) != 1")));
        }
        Ok(GaloisField {
            spec,
            size,
            exp,
            log,
        })
    }

    /// Convenience constructor using [`FieldSpec::new`].
    pub fn with_order(p: u32, k: u32) -> Result<Self> {
        Self::new(FieldSpec::new(p, k)?)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn characteristic(&self) -> u32 {
        self.spec.p
    }

    pub fn degree(&self) -> u32 {
        self.spec.k
    }

    /// Number of elements `s`.
    pub fn size(&self) -> u32 {
        self.size
    }

    /// Order of the multiplicative group, `s - 1`.
    pub fn group_order(&self) -> u32 {
        self.size - 1
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(1)
    }

    /// `α^e` for any integer exponent (reduced mod `s - 1`).
    pub fn alpha_pow(&self, e: i64) -> FieldElement {
        let g = self.group_order() as i64;
        FieldElement(self.exp[e.rem_euclid(g) as usize])
    }

    /// Element from polynomial-basis coefficients (low degree first).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement> {
        if coeffs.len() != self.spec.k as usize || coeffs.iter().any(|&c| c >= self.spec.p) {
            return invalid(format!("coefficients {coeffs:?} do not describe an element of {}", self.spec));
        }
        Ok(FieldElement(encode(coeffs, self.spec.p)))
    }

    pub fn coeffs(&self, a: FieldElement) -> Vec<u32> {
        let p = self.spec.p;
        let mut code = a.0;
        (0..self.spec.k)
            .map(|_| {
                let d = code % p;
                code /= p;
                d
            })
            .collect()
    }

    /// Discrete log of a nonzero element; `None` for zero.
    pub fn log(&self, a: FieldElement) -> Option<u32> {
        if a.0 == 0 {
            None
        } else {
            Some(self.log[a.0 as usize])
        }
    }

    /// `[0, α^0, α^1, …, α^{s-2}]`.
    pub fn elements(&self) -> Vec<FieldElement> {
        std::iter::once(FieldElement(0))
            .chain(self.exp.iter().map(|&c| FieldElement(c)))
            .collect()
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.spec.p;
        if p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.spec.k {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        FieldElement(out)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let p = self.spec.p;
        if p == 2 {
            return a;
        }
        let mut x = a.0;
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.spec.k {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        FieldElement(out)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement(0);
        }
        let g = self.group_order() as u64;
        let e = (self.log[a.0 as usize] as u64 + self.log[b.0 as usize] as u64) % g;
        FieldElement(self.exp[e as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        match self.log(a) {
            None => Err(Error::Domain("inverse of zero".into())),
            Some(e) => Ok(self.alpha_pow(-(e as i64))),
        }
    }

    /// `a^n` for any integer `n`; negative powers of zero are a domain error.
    pub fn pow(&self, a: FieldElement, n: i64) -> Result<FieldElement> {
        match self.log(a) {
            None if n > 0 => Ok(FieldElement(0)),
            None if n == 0 => Ok(self.one()),
            None => Err(Error::Domain("negative power of zero".into())),
            Some(e) => {
                let g = self.group_order() as i128;
                let exp = (e as i128 * n as i128).rem_euclid(g);
                Ok(FieldElement(self.exp[exp as usize]))
            }
        }
    }

    /// Frobenius map `a ↦ a^p`.
    pub fn frobenius(&self, a: FieldElement) -> FieldElement {
        match self.log(a) {
            None => a,
            Some(e) => {
                let g = self.group_order() as u64;
                FieldElement(self.exp[((e as u64 * self.spec.p as u64) % g) as usize])
            }
        }
    }
}

fn encode(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0u32, |acc, &d| acc * p + d)
}
