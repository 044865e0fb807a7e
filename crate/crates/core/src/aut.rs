//! The automorphism group of the curve.
//!
//! Every automorphism is determined by gamma in F_q*, a, b in F_q and a
//! swap bit s:
//!
//! * s = 0:  (x, y) -> (gamma*x + a, gamma^{-1}*y + b)
//! * s = 1:  (x, y) -> (gamma*y + a, gamma^{-1}*x + b)
//!
//! Both shapes preserve (x^q - x)(y^q - y) = c because gamma^q = gamma and
//! a^q = a, so the two Artin-Schreier factors pick up gamma and gamma^{-1}
//! which cancel.  There are 2 * q^2 * (q - 1) such maps and they exhaust
//! the automorphisms of the curve.  Each one extends to a linear map of
//! the ambient space fixing the quadric XY - ZW, which is how projections
//! see them.

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use crate::curve::{CurveParams, CurvePoint};
use crate::field::{FieldCtx, FieldElement, FieldError};
use crate::geom::ProjPoint3;
use crate::tower::Tower;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("the scaling coefficient of an automorphism must be nonzero")]
    ZeroScaling,
    #[error("element set is not closed under the group operations")]
    NotClosed,
}

/// One automorphism, stored over the base field.
#[derive(Clone)]
pub struct AutElement {
    gamma: FieldElement,
    a: FieldElement,
    b: FieldElement,
    swap: bool,
}

impl std::fmt::Debug for AutElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Aut(gamma = {}, a = {}, b = {}, swap = {})",
            self.gamma, self.a, self.b, self.swap
        )
    }
}

impl PartialEq for AutElement {
    fn eq(&self, other: &Self) -> bool {
        self.gamma.ctx().same(other.gamma.ctx()) && self.key() == other.key()
    }
}

impl Eq for AutElement {}

impl std::hash::Hash for AutElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl AutElement {
    pub fn new(
        gamma: FieldElement,
        a: FieldElement,
        b: FieldElement,
        swap: bool,
    ) -> Result<AutElement, AutError> {
        if gamma.is_zero() {
            return Err(AutError::ZeroScaling);
        }
        if !gamma.ctx().same(a.ctx()) || !gamma.ctx().same(b.ctx()) {
            return Err(AutError::Field(FieldError::ContextMismatch));
        }
        Ok(AutElement { gamma, a, b, swap })
    }

    pub fn identity(ctx: &Arc<FieldCtx>) -> AutElement {
        AutElement {
            gamma: ctx.one(),
            a: ctx.zero(),
            b: ctx.zero(),
            swap: false,
        }
    }

    pub fn gamma(&self) -> &FieldElement {
        &self.gamma
    }

    pub fn translation_x(&self) -> &FieldElement {
        &self.a
    }

    pub fn translation_y(&self) -> &FieldElement {
        &self.b
    }

    pub fn swaps(&self) -> bool {
        self.swap
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.gamma.ctx()
    }

    pub fn is_identity(&self) -> bool {
        !self.swap && self.gamma.is_one() && self.a.is_zero() && self.b.is_zero()
    }

    /// Sort/identity key: (swap, gamma, a, b) as packed integers.
    pub fn key(&self) -> [u64; 4] {
        [
            self.swap as u64,
            self.gamma.packed(),
            self.a.packed(),
            self.b.packed(),
        ]
    }

    /// `self` after `other` (functional composition).
    pub fn compose(&self, other: &AutElement) -> AutElement {
        let (g1, a1, b1, s1) = (&self.gamma, &self.a, &self.b, self.swap);
        let (g2, a2, b2) = (&other.gamma, &other.a, &other.b);
        let g1inv = g1.inv().expect("gamma is a unit");
        // the inner map feeds either (x', y') or (y', x') into the outer one
        let (gamma, a, b) = if !s1 {
            (g1 * g2, &(g1 * a2) + a1, &(&g1inv * b2) + b1)
        } else {
            let g2inv = g2.inv().expect("gamma is a unit");
            (g1 * &g2inv, &(g1 * b2) + a1, &(&g1inv * a2) + b1)
        };
        AutElement {
            gamma,
            a,
            b,
            swap: s1 ^ other.swap,
        }
    }

    pub fn inverse(&self) -> AutElement {
        let ginv = self.gamma.inv().expect("gamma is a unit");
        if !self.swap {
            AutElement {
                gamma: ginv.clone(),
                a: -&(&ginv * &self.a),
                b: -&(&self.gamma * &self.b),
                swap: false,
            }
        } else {
            AutElement {
                gamma: self.gamma.clone(),
                a: -&(&self.gamma * &self.b),
                b: -&(&ginv * &self.a),
                swap: true,
            }
        }
    }

    /// Multiplicative order of the element.
    pub fn order(&self) -> usize {
        let mut g = self.clone();
        let mut n = 1;
        while !g.is_identity() {
            g = self.compose(&g);
            n += 1;
            assert!(n <= 1 << 20, "element order out of bounds");
        }
        n
    }

    /// Image of a curve point.  Pole points map among themselves in the way
    /// the coordinate formulas dictate: at a pole of x, y is finite, so the
    /// swap turns it into a pole of y carrying the transformed value.
    pub fn act(&self, params: &CurveParams, pt: &CurvePoint) -> CurvePoint {
        let ginv = self.gamma.inv().expect("gamma is a unit");
        match pt {
            CurvePoint::Affine { x, y } => {
                let k = params.point_level(pt);
                let t = params.tower();
                let g = t.lift(&self.gamma, k).unwrap();
                let gi = t.lift(&ginv, k).unwrap();
                let a = t.lift(&self.a, k).unwrap();
                let b = t.lift(&self.b, k).unwrap();
                let (nx, ny) = if !self.swap {
                    (&(&g * x) + &a, &(&gi * y) + &b)
                } else {
                    (&(&g * y) + &a, &(&gi * x) + &b)
                };
                debug_assert!(params.curve_value(&nx, &ny).is_zero());
                CurvePoint::Affine { x: nx, y: ny }
            }
            CurvePoint::XPole { y0 } => {
                if !self.swap {
                    CurvePoint::XPole {
                        y0: &(&ginv * y0) + &self.b,
                    }
                } else {
                    CurvePoint::YPole {
                        x0: &(&self.gamma * y0) + &self.a,
                    }
                }
            }
            CurvePoint::YPole { x0 } => {
                if !self.swap {
                    CurvePoint::YPole {
                        x0: &(&self.gamma * x0) + &self.a,
                    }
                } else {
                    CurvePoint::XPole {
                        y0: &(&ginv * x0) + &self.b,
                    }
                }
            }
        }
    }

    /// The induced linear map on the ambient space, at tower level `k`.
    /// Row i holds the coefficients of the i-th image coordinate, so a
    /// point transforms as v'_i = sum_j m[i][j] v_j.  Composition of
    /// automorphisms corresponds to matrix product in the same order.
    pub fn matrix(&self, tower: &Tower, k: usize) -> [[FieldElement; 4]; 4] {
        let ctx = tower.level(k).expect("valid level").clone();
        let g = tower.lift(&self.gamma, k).unwrap();
        let gi = g.inv().expect("gamma is a unit");
        let a = tower.lift(&self.a, k).unwrap();
        let b = tower.lift(&self.b, k).unwrap();
        let ab = &a * &b;
        let z = || ctx.zero();
        let one = || ctx.one();
        if !self.swap {
            // x' = g x + a, y' = g^{-1} y + b, w' = x'y'
            [
                [g.clone(), z(), a.clone(), z()],
                [z(), gi.clone(), b.clone(), z()],
                [z(), z(), one(), z()],
                [&g * &b, &gi * &a, ab, one()],
            ]
        } else {
            [
                [z(), g.clone(), a.clone(), z()],
                [gi.clone(), z(), b.clone(), z()],
                [z(), z(), one(), z()],
                [&gi * &a, &g * &b, ab, one()],
            ]
        }
    }

    /// Apply the induced linear map to an ambient point over any tower level.
    pub fn apply_matrix(&self, tower: &Tower, v: &ProjPoint3) -> ProjPoint3 {
        let k = tower.level_of(v.ctx()).expect("point belongs to the tower");
        let m = self.matrix(tower, k);
        let c = v.coords();
        let row = |i: usize| {
            let mut acc = m[i][0].ctx().zero();
            for j in 0..4 {
                acc = &acc + &(&m[i][j] * &c[j]);
            }
            acc
        };
        ProjPoint3::new([row(0), row(1), row(2), row(3)]).expect("linear maps are invertible")
    }
}

/// A finite set of automorphisms closed under composition and inverse,
/// kept sorted by key.
#[derive(Clone, Debug, PartialEq)]
pub struct Subgroup {
    elements: Vec<AutElement>,
}

impl Subgroup {
    pub fn trivial(ctx: &Arc<FieldCtx>) -> Subgroup {
        Subgroup {
            elements: vec![AutElement::identity(ctx)],
        }
    }

    /// Wrap an explicit element list, verifying the group axioms hold.
    pub fn from_elements(mut elements: Vec<AutElement>) -> Result<Subgroup, AutError> {
        if elements.is_empty() {
            return Err(AutError::NotClosed);
        }
        elements.sort_by_key(|g| g.key());
        elements.dedup();
        let keys: HashSet<[u64; 4]> = elements.iter().map(|g| g.key()).collect();
        for g in &elements {
            if !keys.contains(&g.inverse().key()) {
                return Err(AutError::NotClosed);
            }
            for h in &elements {
                if !keys.contains(&g.compose(h).key()) {
                    return Err(AutError::NotClosed);
                }
            }
        }
        if !keys.contains(&AutElement::identity(elements[0].ctx()).key()) {
            return Err(AutError::NotClosed);
        }
        Ok(Subgroup { elements })
    }

    /// Closure of a generating set.
    pub fn generate(gens: &[AutElement]) -> Subgroup {
        assert!(!gens.is_empty(), "need at least one generator");
        let ctx = gens[0].ctx().clone();
        let mut seen: HashSet<[u64; 4]> = HashSet::new();
        let mut elements = vec![AutElement::identity(&ctx)];
        seen.insert(elements[0].key());
        let mut frontier = elements.clone();
        while let Some(g) = frontier.pop() {
            for gen in gens {
                for next in [gen.compose(&g), gen.inverse().compose(&g)] {
                    if seen.insert(next.key()) {
                        elements.push(next.clone());
                        frontier.push(next);
                    }
                }
            }
        }
        elements.sort_by_key(|g| g.key());
        Subgroup { elements }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[AutElement] {
        &self.elements
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.elements[0].ctx()
    }

    pub fn contains(&self, g: &AutElement) -> bool {
        self.elements
            .binary_search_by_key(&g.key(), |h| h.key())
            .is_ok()
    }

    pub fn is_subgroup_of(&self, big: &Subgroup) -> bool {
        self.elements.iter().all(|g| big.contains(g))
    }

    pub fn is_normal_in(&self, big: &Subgroup) -> bool {
        big.elements.iter().all(|g| {
            let ginv = g.inverse();
            self.elements
                .iter()
                .all(|h| self.contains(&g.compose(h).compose(&ginv)))
        })
    }

    pub fn is_abelian(&self) -> bool {
        self.elements
            .iter()
            .enumerate()
            .all(|(i, g)| self.elements[..i].iter().all(|h| g.compose(h) == h.compose(g)))
    }

    /// Least common multiple of the element orders.
    pub fn exponent(&self) -> usize {
        self.elements.iter().fold(1, |acc, g| {
            let o = g.order();
            acc / gcd(acc, o) * o
        })
    }

    /// Orbit of a curve point, sorted by canonical key.
    pub fn orbit(&self, params: &CurveParams, pt: &CurvePoint) -> Vec<CurvePoint> {
        let mut out: Vec<CurvePoint> = Vec::new();
        let mut seen: HashSet<[u64; 4]> = HashSet::new();
        for g in &self.elements {
            let img = g.act(params, pt);
            if seen.insert(params.point_key(&img)) {
                out.push(img);
            }
        }
        out.sort_by_key(|p| params.point_key(p));
        out
    }

    pub fn point_stabilizer(&self, params: &CurveParams, pt: &CurvePoint) -> Subgroup {
        let elements = self
            .elements
            .iter()
            .filter(|g| params.points_equal(&g.act(params, pt), pt))
            .cloned()
            .collect();
        Subgroup { elements }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// All 2 q^2 (q - 1) automorphisms over the given base field.
pub fn full_group(ctx: &Arc<FieldCtx>) -> Subgroup {
    let mut elements = Vec::new();
    for swap in [false, true] {
        for gamma in ctx.iter_elements().filter(|g| !g.is_zero()) {
            for a in ctx.iter_elements() {
                for b in ctx.iter_elements() {
                    elements.push(AutElement {
                        gamma: gamma.clone(),
                        a: a.clone(),
                        b: b.clone(),
                        swap,
                    });
                }
            }
        }
    }
    elements.sort_by_key(|g| g.key());
    Subgroup { elements }
}

/// Abstract isomorphism type of a subgroup, relative to the curve's q and p.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum GroupType {
    #[serde(rename = "trivial")]
    Trivial,
    /// Elementary abelian of order q: the additive group of the base field.
    #[serde(rename = "additive")]
    AdditiveFq,
    /// Order 2q: the additive group extended by the coordinate swap.
    #[serde(rename = "additive-semidirect-c2")]
    FqSemiC2,
    /// Order 2(q - 1): the multiplicative group inverted by the swap
    /// (dihedral; the Klein four group when q = 3).
    #[serde(rename = "multiplicative-semidirect-c2")]
    FqStarSemiC2,
    #[serde(rename = "other")]
    Other {
        order: usize,
        abelian: bool,
        exponent: usize,
    },
}

/// Decide the isomorphism type by structural checks, not by trusting how
/// the subgroup was produced.
pub fn group_type(sub: &Subgroup, q: u64, p: u64) -> GroupType {
    let n = sub.order();
    let q = q as usize;
    let p = p as usize;
    if n == 1 {
        return GroupType::Trivial;
    }
    if n == q && sub.is_abelian() && sub.exponent() == p {
        return GroupType::AdditiveFq;
    }
    if n == 2 * q && has_additive_half(sub, q, p) {
        return GroupType::FqSemiC2;
    }
    if n == 2 * (q - 1) && is_dihedral_over_cyclic(sub, q - 1) {
        return GroupType::FqStarSemiC2;
    }
    GroupType::Other {
        order: n,
        abelian: sub.is_abelian(),
        exponent: sub.exponent(),
    }
}

/// Does an order-2q group contain a subgroup of order q and exponent p?
/// (Index 2 makes it automatically normal.)
fn has_additive_half(sub: &Subgroup, q: usize, p: usize) -> bool {
    // candidate members all satisfy g^p = id; grow subgroups from small
    // generating sets among them (q <= 9 needs at most 3 generators)
    let small: Vec<&AutElement> = sub
        .elements()
        .iter()
        .filter(|g| g.order() == p || g.is_identity())
        .collect();
    let found = |gens: &[&AutElement]| {
        let h = Subgroup::generate(&gens.iter().map(|g| (*g).clone()).collect::<Vec<_>>());
        h.order() == q && h.exponent() == p && {
            debug_assert!(h.is_normal_in(sub));
            true
        }
    };
    let m = small.len();
    for i in 0..m {
        if found(&[small[i]]) {
            return true;
        }
        for j in i + 1..m {
            if found(&[small[i], small[j]]) {
                return true;
            }
            for k in j + 1..m {
                if found(&[small[i], small[j], small[k]]) {
                    return true;
                }
            }
        }
    }
    false
}

/// Does an order-2m group have a normal cyclic subgroup of order m whose
/// elements some outside involution inverts?  (For m = 2 this accepts the
/// Klein four group and rejects the cyclic group of order 4.)
fn is_dihedral_over_cyclic(sub: &Subgroup, m: usize) -> bool {
    for g in sub.elements() {
        if g.order() != m {
            continue;
        }
        let c = Subgroup::generate(std::slice::from_ref(g));
        if c.order() != m || !c.is_normal_in(sub) {
            continue;
        }
        for s in sub.elements() {
            if c.contains(s) || s.order() != 2 {
                continue;
            }
            let sinv = s.inverse();
            if c
                .elements()
                .iter()
                .all(|t| s.compose(t).compose(&sinv) == t.inverse())
            {
                return true;
            }
        }
    }
    false
}
