//! Projection of the curve from a line, and the Galois test.
//!
//! A line l of the ambient space defines a projection pi_l to the pencil of
//! hyperplanes through l; restricted to the curve it is a degree
//! 2q - (l . X) map to the projective line.  The subgroup G_l of curve
//! automorphisms sigma with pi_l o sigma = pi_l always injects into the
//! Galois closure's group, so l is a Galois line exactly when |G_l| equals
//! the projection degree.
//!
//! Membership of sigma in G_l is decided exactly: writing M for the linear
//! extension of sigma and (h1, h2) for the pencil of l, the quadratic form
//! (h1 o M) * h2 - (h2 o M) * h1 vanishes on the curve iff it is a scalar
//! multiple of XY - ZW, the only quadric through the curve.  That reduces
//! the functional identity to ten coefficient comparisons.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::aut::{full_group, group_type, AutElement, AutError, GroupType, Subgroup};
use crate::curve::{CurveError, CurveParams, CurvePoint, LineIntersections};
use crate::field::{FieldCtx, FieldElement, FieldError};
use crate::geom::{GeomError, Hyperplane, Line3, ProjPoint3};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GaloisError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Aut(#[from] AutError),
    #[error("the pencil parameter (0 : 0) does not name a fiber")]
    InvalidPencilPoint,
}

impl From<FieldError> for GaloisError {
    fn from(e: FieldError) -> Self {
        GaloisError::Curve(e.into())
    }
}

impl From<GeomError> for GaloisError {
    fn from(e: GeomError) -> Self {
        GaloisError::Curve(e.into())
    }
}

/// Where a line sits in the classification of Galois lines: the plane
/// at infinity contributes q - 1 lines through the quadric's center
/// (0:0:0:1) and q^2 lines avoiding it, and every ruling of the quadric
/// is a Galois line of the second kind, tangent ones included.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    #[serde(rename = "type-a-through-center")]
    TypeAThroughCenter,
    #[serde(rename = "type-a-avoiding-center")]
    TypeAAvoidingCenter,
    #[serde(rename = "type-b")]
    TypeB,
    #[serde(rename = "tangent-type-b")]
    TangentTypeB,
    #[serde(rename = "non-galois")]
    NonGalois,
}

/// Everything the toolkit knows about one line.
#[derive(Clone, Debug)]
pub struct GaloisAnalysis {
    pub degree: usize,
    pub intersections: LineIntersections,
    pub stabilizer: Subgroup,
    pub is_galois: bool,
    pub group_type: GroupType,
    pub classification: Classification,
}

/// One point of a projection fiber with its ramification index.
#[derive(Clone, Debug)]
pub struct FiberPoint {
    pub point: CurvePoint,
    pub ramification_index: usize,
}

/// A fiber of the projection over one pencil member, as visible over a
/// chosen tower level.  `complete` records whether the ramification
/// indices account for the whole projection degree; `section_multiplicity`
/// is the part of the full hyperplane degree 2q realized by points
/// rational over that level.
#[derive(Clone, Debug)]
pub struct FiberResult {
    pub points: Vec<FiberPoint>,
    pub degree: usize,
    pub section_multiplicity: usize,
    pub complete: bool,
}

/// Does pi_l o sigma = pi_l hold identically on the curve?  Decided through
/// the quadric test described in the module docs.
pub fn commutes_with_projection(
    params: &CurveParams,
    sigma: &AutElement,
    line: &Line3,
) -> Result<bool, GaloisError> {
    let tower = params.tower();
    let k = tower
        .level_of(line.ctx())
        .ok_or(FieldError::ContextMismatch)?;
    let ctx = tower.level(k)?.clone();
    let m = sigma.matrix(tower, k);
    let (h1, h2) = line.pencil_basis();
    // row vector h |-> h o M, i.e. (hM)_j = sum_r h_r M[r][j]
    let pull = |h: &Hyperplane| -> [FieldElement; 4] {
        std::array::from_fn(|j| {
            let mut acc = ctx.zero();
            for (r, row) in m.iter().enumerate() {
                acc = &acc + &(&h.coeffs()[r] * &row[j]);
            }
            acc
        })
    };
    let m1 = pull(&h1);
    let m2 = pull(&h2);
    let c1 = h1.coeffs();
    let c2 = h2.coeffs();
    // Q = (h1 o M) h2 - (h2 o M) h1, as a symmetric array of coefficients
    let diag = |i: usize| &(&m1[i] * &c2[i]) - &(&m2[i] * &c1[i]);
    let cross = |i: usize, j: usize| {
        &(&(&m1[i] * &c2[j]) + &(&m1[j] * &c2[i]))
            - &(&(&m2[i] * &c1[j]) + &(&m2[j] * &c1[i]))
    };
    // vanishing on the curve <=> proportional to XY - ZW
    for i in 0..4 {
        if !diag(i).is_zero() {
            return Ok(false);
        }
    }
    for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
        if !cross(i, j).is_zero() {
            return Ok(false);
        }
    }
    Ok(cross(0, 1) == -&cross(2, 3))
}

/// Same question answered by brute force on sample points: the images of
/// the sample under sigma must project to the same pencil member.  Points
/// on the line itself are skipped (the projection is undefined there).
/// This exists to cross-check `commutes_with_projection` and trusts the
/// samples to be rich enough.
pub fn commutes_pointwise(
    params: &CurveParams,
    sigma: &AutElement,
    line: &Line3,
    samples: &[CurvePoint],
) -> Result<bool, GaloisError> {
    let tower = params.tower();
    let kl = tower
        .level_of(line.ctx())
        .ok_or(FieldError::ContextMismatch)?;
    let (h1, h2) = line.pencil_basis();
    for pt in samples {
        let kp = params.point_level(pt);
        let k = lcm(kp, kl);
        let v = params.embed(pt).lift(tower, k);
        let h1k = h1.lift(tower, k);
        let h2k = h2.lift(tower, k);
        let a1 = h1k.eval(&v);
        let a2 = h2k.eval(&v);
        if a1.is_zero() && a2.is_zero() {
            continue; // the sample sits on the line
        }
        let w = params.embed(&sigma.act(params, pt)).lift(tower, k);
        let b1 = h1k.eval(&w);
        let b2 = h2k.eval(&w);
        if &a1 * &b2 != &a2 * &b1 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// The subgroup of curve automorphisms commuting with the projection.
pub fn stabilizer(params: &CurveParams, line: &Line3) -> Result<Subgroup, GaloisError> {
    let mut elements = Vec::new();
    for g in full_group(params.base_ctx()).elements() {
        if commutes_with_projection(params, g, line)? {
            elements.push(g.clone());
        }
    }
    Ok(Subgroup::from_elements(elements)?)
}

/// Degree of the projection from the line: the curve degree 2q minus
/// whatever the line already cuts out on the curve.
pub fn projection_degree(params: &CurveParams, line: &Line3) -> Result<usize, GaloisError> {
    let ints = params.line_intersections(line)?;
    Ok(2 * params.q() as usize - ints.total())
}

/// Geometric classification of a line, independent of any group
/// computation.  The analysis pipeline checks it against the Galois test.
pub fn classify(
    params: &CurveParams,
    line: &Line3,
    ints: &LineIntersections,
) -> Classification {
    let q = params.q() as usize;
    if params.line_in_quadric(line) {
        let tangent = ints.points.len() == 1
            && ints.missing_multiplicity == 0
            && ints.points[0].1 == q;
        return if tangent {
            Classification::TangentTypeB
        } else {
            Classification::TypeB
        };
    }
    let tower = params.tower();
    let base_line = if tower.level_of(line.ctx()) == Some(1) {
        Some(line.clone())
    } else {
        line.lower(tower, 1)
    };
    let Some(l) = base_line else {
        return Classification::NonGalois;
    };
    let ctx = params.base_ctx();
    let z_plane =
        Hyperplane::new([ctx.zero(), ctx.zero(), ctx.one(), ctx.zero()]).unwrap();
    if !l.in_hyperplane(&z_plane) {
        return Classification::NonGalois;
    }
    let center =
        ProjPoint3::new([ctx.zero(), ctx.zero(), ctx.zero(), ctx.one()]).unwrap();
    if l.contains_point(&center) {
        Classification::TypeAThroughCenter
    } else {
        Classification::TypeAAvoidingCenter
    }
}

/// Full decision for one line: degree, stabilizer, Galois verdict, group
/// shape and geometric family.
pub fn analyze(params: &CurveParams, line: &Line3) -> Result<GaloisAnalysis, GaloisError> {
    let intersections = params.line_intersections(line)?;
    let degree = 2 * params.q() as usize - intersections.total();
    let stab = stabilizer(params, line)?;
    let is_galois = degree > 0 && stab.order() == degree;
    let gtype = group_type(&stab, params.q(), params.p());
    let classification = classify(params, line, &intersections);
    Ok(GaloisAnalysis {
        degree,
        intersections,
        stabilizer: stab,
        is_galois,
        group_type: gtype,
        classification,
    })
}

/// The fiber of the projection over the pencil member (lambda : mu),
/// computed over tower level `k`.  The corresponding hyperplane is
/// mu*h1 - lambda*h2, which vanishes exactly where (h1 : h2) = (lambda : mu).
/// Ramification indices are hyperplane orders with the line's own base
/// contribution removed; points with index 0 belong to the line, not the
/// fiber.
pub fn fiber(
    params: &CurveParams,
    line: &Line3,
    lambda: &FieldElement,
    mu: &FieldElement,
    k: usize,
) -> Result<FiberResult, GaloisError> {
    if lambda.is_zero() && mu.is_zero() {
        return Err(GaloisError::InvalidPencilPoint);
    }
    let tower = params.tower();
    let (h1, h2) = line.pencil_basis();
    let h1k = h1.lift(tower, k);
    let h2k = h2.lift(tower, k);
    let lam = tower
        .lift(lambda, k)
        .map_err(|_| GaloisError::Curve(FieldError::ContextMismatch.into()))?;
    let mu = tower
        .lift(mu, k)
        .map_err(|_| GaloisError::Curve(FieldError::ContextMismatch.into()))?;
    let coeffs: [FieldElement; 4] = std::array::from_fn(|i| {
        &(&mu * &h1k.coeffs()[i]) - &(&lam * &h2k.coeffs()[i])
    });
    let h = Hyperplane::new(coeffs).map_err(GaloisError::from)?;
    let base = params.line_intersections(line)?;
    let degree = 2 * params.q() as usize - base.total();
    let section = params.hyperplane_section(&h)?;
    let mut points = Vec::new();
    let mut section_multiplicity = 0;
    for pt in section {
        let ord = params.ord_hyperplane(&pt, &h)?;
        section_multiplicity += ord;
        let base_mult = base
            .points
            .iter()
            .find(|(bp, _)| params.points_equal(bp, &pt))
            .map(|(_, m)| *m)
            .unwrap_or(0);
        debug_assert!(ord >= base_mult);
        let e = ord - base_mult;
        if e > 0 {
            points.push(FiberPoint {
                point: pt,
                ramification_index: e,
            });
        }
    }
    let found: usize = points.iter().map(|p| p.ramification_index).sum();
    debug_assert!(found <= degree);
    Ok(FiberResult {
        points,
        degree,
        section_multiplicity,
        complete: found == degree,
    })
}

/// Some(e) when every point of the fiber has the same ramification index e.
pub fn uniform_ramification(fiber: &FiberResult) -> Option<usize> {
    let mut it = fiber.points.iter().map(|p| p.ramification_index);
    let first = it.next()?;
    it.all(|e| e == first).then_some(first)
}

/// The x-translations (x, y) -> (x + a, y): the stabilizer of every
/// constant-x ruling, the x-infinity line included.
pub fn x_translation_group(ctx: &Arc<FieldCtx>) -> Subgroup {
    let gens: Vec<AutElement> = ctx
        .iter_elements()
        .map(|a| AutElement::new(ctx.one(), a, ctx.zero(), false).unwrap())
        .collect();
    Subgroup::generate(&gens)
}

/// The y-translations (x, y) -> (x, y + b).
pub fn y_translation_group(ctx: &Arc<FieldCtx>) -> Subgroup {
    let gens: Vec<AutElement> = ctx
        .iter_elements()
        .map(|b| AutElement::new(ctx.one(), ctx.zero(), b, false).unwrap())
        .collect();
    Subgroup::generate(&gens)
}

/// The closed-form stabilizer each family is expected to have; None for
/// lines outside the classification.  Used to cross-check the computed
/// stabilizers, never to produce them.
pub fn predicted_stabilizer(
    params: &CurveParams,
    line: &Line3,
    class: Classification,
) -> Result<Option<Subgroup>, GaloisError> {
    let ctx = params.base_ctx();
    match class {
        Classification::NonGalois => Ok(None),
        Classification::TypeB | Classification::TangentTypeB => {
            // decide the ruling family from the constant Segre factor:
            // (X : Z) constant means x is constant along the line
            let (pa, pb) = line.spanning_points();
            let x_factor = |v: &ProjPoint3| {
                let c = v.coords();
                if !c[0].is_zero() || !c[2].is_zero() {
                    (c[0].clone(), c[2].clone())
                } else {
                    (c[3].clone(), c[1].clone())
                }
            };
            let fa = x_factor(&pa);
            let fb = x_factor(&pb);
            let constant_x = &fa.0 * &fb.1 == &fa.1 * &fb.0;
            Ok(Some(if constant_x {
                x_translation_group(ctx)
            } else {
                y_translation_group(ctx)
            }))
        }
        Classification::TypeAThroughCenter => {
            let l = line.lower(params.tower(), 1).unwrap_or_else(|| line.clone());
            let (pa, pb) = l.spanning_points();
            // some spanning point has Y != 0, and X/Y there is the alpha of
            // {X = alpha*Y, Z = 0}
            let v = if !pa.coords()[1].is_zero() { pa } else { pb };
            let alpha = &v.coords()[0] * &v.coords()[1].inv()?;
            let mut elements = Vec::new();
            for b in ctx.iter_elements() {
                elements.push(AutElement::new(
                    ctx.one(),
                    &alpha * &b,
                    b.clone(),
                    false,
                )?);
                elements.push(AutElement::new(-&alpha, &alpha * &b, b, true)?);
            }
            Ok(Some(Subgroup::from_elements(elements)?))
        }
        Classification::TypeAAvoidingCenter => {
            let l = line.lower(params.tower(), 1).unwrap_or_else(|| line.clone());
            let (pa, pb) = l.spanning_points();
            // eliminate Y then X between the spanning points to find where
            // the line crosses the two coordinate planes
            let elim = |i: usize| -> ProjPoint3 {
                let ca = pa.coords();
                let cb = pb.coords();
                let w: [FieldElement; 4] = std::array::from_fn(|j| {
                    &(&cb[i] * &ca[j]) - &(&ca[i] * &cb[j])
                });
                ProjPoint3::new(w).expect("spanning points are independent")
            };
            // on {Z = 0, aX + bY + W = 0} the Y = 0 point is (1 : 0 : 0 : -a)
            let py = elim(1);
            let a = -&(&py.coords()[3] * &py.coords()[0].inv()?);
            let px = elim(0);
            let b = -&(&px.coords()[3] * &px.coords()[1].inv()?);
            let mut elements = Vec::new();
            for gamma in ctx.iter_elements().filter(|g| !g.is_zero()) {
                let ginv = gamma.inv()?;
                elements.push(AutElement::new(
                    gamma.clone(),
                    &b * &(&gamma - &ctx.one()),
                    &a * &(&ginv - &ctx.one()),
                    false,
                )?);
                elements.push(AutElement::new(
                    gamma.clone(),
                    &(&gamma * &a) - &b,
                    &(&ginv * &b) - &a,
                    true,
                )?);
            }
            Ok(Some(Subgroup::from_elements(elements)?))
        }
    }
}

/// The abstract group shape each family carries.
pub fn expected_group_type(class: Classification) -> Option<GroupType> {
    match class {
        Classification::TypeB | Classification::TangentTypeB => Some(GroupType::AdditiveFq),
        Classification::TypeAThroughCenter => Some(GroupType::FqSemiC2),
        Classification::TypeAAvoidingCenter => Some(GroupType::FqStarSemiC2),
        Classification::NonGalois => None,
    }
}
