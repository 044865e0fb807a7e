//! Exact arithmetic in finite fields F_{p^e}.
//!
//! A [`FieldCtx`] fixes the representation F_p[T]/(m) once and for all: the
//! modulus m is the first monic irreducible of degree e in counter order
//! (coefficient vectors read as little-endian base-p integers), so two
//! independently built contexts for the same (p, e) agree coefficient for
//! coefficient.  Elements are coordinate vectors over that basis and all
//! operations are exact.

use std::fmt;
use std::sync::Arc;

use serde::ser::{Serialize, SerializeStruct, Serializer};
use thiserror::Error;

/// Largest cardinality `build` accepts unless the caller raises the bound.
pub const DEFAULT_CARDINALITY_BOUND: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("field of {p}^{e} elements exceeds the cardinality bound {bound}")]
    DegreeOutOfRange { p: u64, e: usize, bound: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different field contexts")]
    ContextMismatch,
    #[error("{0} is not a power of the field characteristic")]
    BadBase(u64),
    #[error("the zero polynomial does not have a root list")]
    ZeroPolynomial,
    #[error("extension level {0} is not part of the built tower")]
    LevelMissing(usize),
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Arithmetic context for F_{p^e}.  Shared behind an `Arc`; elements keep a
/// handle to their context and refuse to mix with a structurally different
/// one.
pub struct FieldCtx {
    p: u64,
    e: usize,
    /// Monic, length e+1, coefficients mod p, little-endian.  For e = 1 the
    /// convention is m = T.
    modulus: Vec<u64>,
    cardinality: u64,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{{{}^{}}}", self.p, self.e)
    }
}

// ---- raw polynomial helpers over F_p, used before any context exists ----

/// Remainder of a by b over F_p, both little-endian, b nonzero with
/// invertible (here: 1) leading coefficient.
fn raw_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap() % p;
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for j in 0..=db {
                let idx = shift + j;
                let sub = (lead * b[j]) % p;
                r[idx] = (r[idx] + p - sub) % p;
            }
        }
        r.pop();
    }
    while r.last() == Some(&0) {
        r.pop();
    }
    r
}

/// Trial-division irreducibility for a monic polynomial over F_p: divide by
/// every monic polynomial of degree up to deg/2.
fn raw_is_irreducible(f: &[u64], p: u64) -> bool {
    let deg = f.len() - 1;
    if deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        // all monic divisor candidates of degree d, counter order
        let count = p.pow(d as u32);
        for packed in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut v = packed;
            for _ in 0..d {
                g.push(v % p);
                v /= p;
            }
            g.push(1);
            if raw_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FieldCtx {
    pub fn build(p: u64, e: usize) -> Result<Arc<FieldCtx>, FieldError> {
        Self::build_with_bound(p, e, DEFAULT_CARDINALITY_BOUND)
    }

    /// Build F_{p^e} with an explicit cardinality bound.  The bound caps the
    /// cost of the counter-order modulus scan and of exhaustive element
    /// enumeration; raise it deliberately for large towers.
    pub fn build_with_bound(p: u64, e: usize, bound: u64) -> Result<Arc<FieldCtx>, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NonPrime(p));
        }
        if e == 0 {
            return Err(FieldError::DegreeOutOfRange { p, e, bound });
        }
        let mut card: u64 = 1;
        for _ in 0..e {
            card = card
                .checked_mul(p)
                .ok_or(FieldError::DegreeOutOfRange { p, e, bound })?;
            if card > bound {
                return Err(FieldError::DegreeOutOfRange { p, e, bound });
            }
        }
        let modulus = if e == 1 {
            vec![0, 1]
        } else {
            Self::find_modulus(p, e)
        };
        Ok(Arc::new(FieldCtx {
            p,
            e,
            modulus,
            cardinality: card,
        }))
    }

    /// First monic irreducible of degree e in counter order on the non-leading
    /// coefficients.
    fn find_modulus(p: u64, e: usize) -> Vec<u64> {
        let count = p.checked_pow(e as u32).expect("scan space fits u64");
        for packed in 0..count {
            let mut f = Vec::with_capacity(e + 1);
            let mut v = packed;
            for _ in 0..e {
                f.push(v % p);
                v /= p;
            }
            f.push(1);
            if raw_is_irreducible(&f, p) {
                return f;
            }
        }
        unreachable!("an irreducible of every degree exists");
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn cardinality(&self) -> u64 {
        self.cardinality
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn same(&self, other: &FieldCtx) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }

    pub fn zero(self: &Arc<Self>) -> FieldElement {
        FieldElement {
            ctx: self.clone(),
            coords: vec![0; self.e],
        }
    }

    pub fn one(self: &Arc<Self>) -> FieldElement {
        self.from_packed(1)
    }

    /// Element from explicit coordinates (low degree first); shorter vectors
    /// are zero-padded, entries reduced mod p.
    pub fn elem(self: &Arc<Self>, coords: &[u64]) -> FieldElement {
        assert!(coords.len() <= self.e, "coordinate vector too long");
        let mut c = vec![0u64; self.e];
        for (i, &v) in coords.iter().enumerate() {
            c[i] = v % self.p;
        }
        FieldElement {
            ctx: self.clone(),
            coords: c,
        }
    }

    /// Element from its packed little-endian base-p value.
    pub fn from_packed(self: &Arc<Self>, packed: u64) -> FieldElement {
        assert!(packed < self.cardinality, "packed value out of range");
        let mut c = vec![0u64; self.e];
        let mut v = packed;
        for slot in c.iter_mut() {
            *slot = v % self.p;
            v /= self.p;
        }
        FieldElement {
            ctx: self.clone(),
            coords: c,
        }
    }

    /// The residue class of T; equal to 1 in a prime field.
    pub fn generator(self: &Arc<Self>) -> FieldElement {
        if self.e == 1 {
            self.one()
        } else {
            self.from_packed(self.p)
        }
    }

    /// All elements in counter order.
    pub fn iter_elements(self: &Arc<Self>) -> impl Iterator<Item = FieldElement> + '_ {
        let ctx = self.clone();
        (0..self.cardinality).map(move |v| ctx.from_packed(v))
    }

    fn reduce(&self, mut c: Vec<u64>) -> Vec<u64> {
        // c has degree <= 2e-2; fold top coefficients down with the modulus
        let e = self.e;
        let p = self.p;
        while c.len() > e {
            let lead = c.pop().unwrap() % p;
            if lead != 0 {
                let shift = c.len() - e;
                for j in 0..e {
                    let sub = (lead * self.modulus[j]) % p;
                    c[shift + j] = (c[shift + j] + p - sub) % p;
                }
            }
        }
        c.resize(e, 0);
        c
    }
}

impl Serialize for FieldCtx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FieldCtx", 3)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("e", &self.e)?;
        st.serialize_field("modulus", &self.modulus)?;
        st.end()
    }
}

/// An element of F_{p^e}, stored as coordinates in the power basis of the
/// context's modulus.
#[derive(Clone)]
pub struct FieldElement {
    ctx: Arc<FieldCtx>,
    coords: Vec<u64>,
}

impl FieldElement {
    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coords[0] == 1 && self.coords[1..].iter().all(|&c| c == 0)
    }

    /// Multiply by a prime-field scalar given as an integer.
    pub fn scale_by(&self, c: u64) -> FieldElement {
        let p = self.ctx.p;
        let c = c % p;
        FieldElement {
            ctx: self.ctx.clone(),
            coords: self.coords.iter().map(|a| (a * c) % p).collect(),
        }
    }

    /// Little-endian base-p packing; the canonical sort key.
    pub fn packed(&self) -> u64 {
        let p = self.ctx.p;
        let mut v = 0u64;
        for &c in self.coords.iter().rev() {
            v = v * p + c;
        }
        v
    }

    fn assert_same(&self, other: &FieldElement) {
        assert!(
            self.ctx.same(&other.ctx),
            "field context mismatch: {:?} vs {:?}",
            self.ctx,
            other.ctx
        );
    }

    pub fn checked_add(&self, rhs: &FieldElement) -> Result<FieldElement, FieldError> {
        if !self.ctx.same(&rhs.ctx) {
            return Err(FieldError::ContextMismatch);
        }
        Ok(self + rhs)
    }

    pub fn checked_mul(&self, rhs: &FieldElement) -> Result<FieldElement, FieldError> {
        if !self.ctx.same(&rhs.ctx) {
            return Err(FieldError::ContextMismatch);
        }
        Ok(self * rhs)
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        // x^(card-2); cheap at our sizes and free of a second gcd code path
        Ok(self.pow((self.ctx.cardinality - 2) as u128))
    }

    pub fn pow(&self, mut exp: u128) -> FieldElement {
        let mut base = self.clone();
        let mut acc = self.ctx.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            exp >>= 1;
        }
        acc
    }

    /// x^s for s a power of the characteristic; the field homomorphism.
    pub fn frobenius(&self, s: u64) -> Result<FieldElement, FieldError> {
        let p = self.ctx.p;
        let mut v = s;
        while v > 1 {
            if v % p != 0 {
                return Err(FieldError::BadBase(s));
            }
            v /= p;
        }
        if v != 1 {
            return Err(FieldError::BadBase(s));
        }
        Ok(self.pow(s as u128))
    }

    /// Does x lie in the subfield of s elements?  s must be a power of p with
    /// exponent dividing e.
    pub fn in_subfield(&self, s: u64) -> Result<bool, FieldError> {
        let p = self.ctx.p;
        let mut v = s;
        let mut d = 0usize;
        while v > 1 {
            if v % p != 0 {
                return Err(FieldError::BadBase(s));
            }
            v /= p;
            d += 1;
        }
        if v != 1 || d == 0 || self.ctx.e % d != 0 {
            return Err(FieldError::BadBase(s));
        }
        Ok(self.pow(s as u128) == *self)
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same(&other.ctx) && self.coords == other.coords
    }
}

impl Eq for FieldElement {}

impl std::hash::Hash for FieldElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ctx.p.hash(state);
        self.ctx.e.hash(state);
        self.coords.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{:?}", self.packed(), self.ctx)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.packed())
    }
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.coords.iter())
    }
}

impl std::ops::Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.assert_same(rhs);
        let p = self.ctx.p;
        let coords = self
            .coords
            .iter()
            .zip(&rhs.coords)
            .map(|(a, b)| (a + b) % p)
            .collect();
        FieldElement {
            ctx: self.ctx.clone(),
            coords,
        }
    }
}

impl std::ops::Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.assert_same(rhs);
        let p = self.ctx.p;
        let coords = self
            .coords
            .iter()
            .zip(&rhs.coords)
            .map(|(a, b)| (a + p - b) % p)
            .collect();
        FieldElement {
            ctx: self.ctx.clone(),
            coords,
        }
    }
}

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        let p = self.ctx.p;
        let coords = self.coords.iter().map(|a| (p - a) % p).collect();
        FieldElement {
            ctx: self.ctx.clone(),
            coords,
        }
    }
}

impl std::ops::Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.assert_same(rhs);
        let p = self.ctx.p;
        let e = self.ctx.e;
        if e == 1 {
            return FieldElement {
                ctx: self.ctx.clone(),
                coords: vec![(self.coords[0] * rhs.coords[0]) % p],
            };
        }
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &a) in self.coords.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.coords.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a * b) % p;
            }
        }
        FieldElement {
            ctx: self.ctx.clone(),
            coords: self.ctx.reduce(prod),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_uses_t_as_modulus() {
        let f3 = FieldCtx::build(3, 1).unwrap();
        assert_eq!(f3.modulus(), &[0, 1]);
        assert_eq!(f3.cardinality(), 3);
    }

    #[test]
    fn f4_modulus_is_the_unique_irreducible_quadratic() {
        let f4 = FieldCtx::build(2, 2).unwrap();
        assert_eq!(f4.modulus(), &[1, 1, 1]); // T^2 + T + 1
    }

    #[test]
    fn f27_modulus_matches_brute_force_scan() {
        // Oracle: a cubic over F_3 is irreducible iff it has no roots.
        // Scan all monic cubics in counter order and take the first.
        let mut expect: Option<Vec<u64>> = None;
        'scan: for packed in 0u64..27 {
            let f = [packed % 3, (packed / 3) % 3, (packed / 9) % 3, 1];
            let mut has_root = false;
            for x in 0u64..3 {
                let mut v = 0u64;
                for &c in f.iter().rev() {
                    v = (v * x + c) % 3;
                }
                if v == 0 {
                    has_root = true;
                    break;
                }
            }
            if !has_root {
                expect = Some(f.to_vec());
                break 'scan;
            }
        }
        let f27 = FieldCtx::build(3, 3).unwrap();
        assert_eq!(f27.modulus(), expect.unwrap().as_slice());
        // and the winner is T^3 + 2T + 1
        assert_eq!(f27.modulus(), &[1, 2, 0, 1]);
    }

    #[test]
    fn rejects_non_prime_and_oversize() {
        assert_eq!(
            FieldCtx::build(6, 1).unwrap_err(),
            FieldError::NonPrime(6)
        );
        assert!(matches!(
            FieldCtx::build(2, 64),
            Err(FieldError::DegreeOutOfRange { .. })
        ));
    }

    #[test]
    fn inverse_of_two_in_f3() {
        let f3 = FieldCtx::build(3, 1).unwrap();
        let two = f3.from_packed(2);
        assert_eq!(two.inv().unwrap(), two);
        assert_eq!(f3.zero().inv().unwrap_err(), FieldError::DivisionByZero);
    }

    #[test]
    fn f4_generator_squares_to_its_successor() {
        // with modulus T^2+T+1, w^2 = w + 1
        let f4 = FieldCtx::build(2, 2).unwrap();
        let w = f4.generator();
        assert_eq!(&w * &w, f4.elem(&[1, 1]));
        // and w^3 = 1
        assert!(w.pow(3).is_one());
    }

    #[test]
    fn frobenius_fixes_exactly_the_base_field_of_f9() {
        let f9 = FieldCtx::build(3, 2).unwrap();
        for x in f9.iter_elements() {
            let fixed = x.frobenius(3).unwrap() == x;
            assert_eq!(fixed, x.packed() < 3, "x = {}", x);
            // x^9 = x for everything
            assert_eq!(x.frobenius(9).unwrap(), x);
        }
        assert_eq!(
            f9.one().frobenius(6).unwrap_err(),
            FieldError::BadBase(6)
        );
    }

    #[test]
    fn subfield_membership_in_f16() {
        let f16 = FieldCtx::build(2, 4).unwrap();
        let mut in_f4 = 0;
        for x in f16.iter_elements() {
            if x.in_subfield(4).unwrap() {
                in_f4 += 1;
            }
            assert!(x.in_subfield(16).unwrap());
            assert_eq!(x.in_subfield(8).unwrap_err(), FieldError::BadBase(8));
        }
        assert_eq!(in_f4, 4);
    }

    #[test]
    fn field_axioms_sampled() {
        // distributivity, associativity, inverses across a few contexts
        for (p, e) in [(3, 1), (2, 2), (3, 2), (5, 1), (2, 3), (7, 1), (3, 3)] {
            let ctx = FieldCtx::build(p, e).unwrap();
            let card = ctx.cardinality();
            let pick = |seed: u64| ctx.from_packed(seed.wrapping_mul(0x9e3779b9) % card);
            for s in 0..200u64 {
                let a = pick(s);
                let b = pick(s + 1000);
                let c = pick(s + 2000);
                assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
                assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
                assert_eq!(&a + &(-&a), ctx.zero());
                if !a.is_zero() {
                    assert!((&a * &a.inv().unwrap()).is_one());
                }
                // p-fold sum vanishes
                let mut s_ = ctx.zero();
                for _ in 0..p {
                    s_ = &s_ + &a;
                }
                assert!(s_.is_zero());
            }
        }
    }

    #[test]
    fn checked_ops_reject_mixed_contexts() {
        let f3 = FieldCtx::build(3, 1).unwrap();
        let f9 = FieldCtx::build(3, 2).unwrap();
        let a = f3.one();
        let b = f9.one();
        assert_eq!(a.checked_add(&b).unwrap_err(), FieldError::ContextMismatch);
        assert_eq!(a.checked_mul(&b).unwrap_err(), FieldError::ContextMismatch);
    }

    #[test]
    fn packed_round_trip() {
        let f8 = FieldCtx::build(2, 3).unwrap();
        for v in 0..8 {
            assert_eq!(f8.from_packed(v).packed(), v);
        }
    }
}
