//! Points, hyperplanes, and lines of P^3 over a finite field.
//!
//! Everything is kept in a canonical shape: point and hyperplane vectors are
//! scaled so their first nonzero entry is 1, and a line is stored as the
//! reduced row echelon basis of the two-dimensional space of hyperplanes
//! containing it.  Equal geometric objects therefore compare equal as data,
//! whichever way they were constructed.

use std::sync::Arc;

use thiserror::Error;

use crate::field::{FieldCtx, FieldElement};
use crate::linalg;
use crate::tower::Tower;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("the zero vector does not define a projective object")]
    ZeroVector,
    #[error("coincident points do not span a line")]
    CoincidentPoints,
    #[error("dependent hyperplanes do not cut a line")]
    DependentHyperplanes,
    #[error("operands belong to different field contexts")]
    ContextMismatch,
}

fn normalize4(mut v: [FieldElement; 4]) -> Result<[FieldElement; 4], GeomError> {
    let lead = v.iter().position(|c| !c.is_zero()).ok_or(GeomError::ZeroVector)?;
    let inv = v[lead].inv().unwrap();
    for c in v.iter_mut() {
        *c = &*c * &inv;
    }
    Ok(v)
}

/// A point of P^3, first nonzero coordinate scaled to 1.
#[derive(Clone, PartialEq, Eq)]
pub struct ProjPoint3 {
    coords: [FieldElement; 4],
}

impl std::fmt::Debug for ProjPoint3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}:{}:{}:{})",
            self.coords[0], self.coords[1], self.coords[2], self.coords[3]
        )
    }
}

impl ProjPoint3 {
    pub fn new(coords: [FieldElement; 4]) -> Result<ProjPoint3, GeomError> {
        Ok(ProjPoint3 {
            coords: normalize4(coords)?,
        })
    }

    pub fn coords(&self) -> &[FieldElement; 4] {
        &self.coords
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.coords[0].ctx()
    }

    pub fn lift(&self, tower: &Tower, k: usize) -> ProjPoint3 {
        let coords = self
            .coords
            .clone()
            .map(|c| tower.lift(&c, k).expect("liftable coordinates"));
        ProjPoint3 { coords } // scaling survives embedding
    }

    /// Packed coordinate tuple, used for deterministic ordering.
    pub fn key(&self) -> [u64; 4] {
        [
            self.coords[0].packed(),
            self.coords[1].packed(),
            self.coords[2].packed(),
            self.coords[3].packed(),
        ]
    }
}

/// A hyperplane of P^3 given by its coefficient vector, same scaling rule.
#[derive(Clone, PartialEq, Eq)]
pub struct Hyperplane {
    coeffs: [FieldElement; 4],
}

const AXES: [&str; 4] = ["X", "Y", "Z", "W"];

impl std::fmt::Debug for Hyperplane {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut terms = Vec::new();
        for (c, axis) in self.coeffs.iter().zip(AXES) {
            if c.is_zero() {
                continue;
            }
            if c.is_one() {
                terms.push(axis.to_string());
            } else {
                terms.push(format!("{}*{}", c, axis));
            }
        }
        write!(f, "{} = 0", terms.join(" + "))
    }
}

impl Hyperplane {
    pub fn new(coeffs: [FieldElement; 4]) -> Result<Hyperplane, GeomError> {
        Ok(Hyperplane {
            coeffs: normalize4(coeffs)?,
        })
    }

    pub fn coeffs(&self) -> &[FieldElement; 4] {
        &self.coeffs
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.coeffs[0].ctx()
    }

    pub fn eval(&self, p: &ProjPoint3) -> FieldElement {
        let mut acc = self.ctx().zero();
        for (c, v) in self.coeffs.iter().zip(p.coords()) {
            acc = &acc + &(c * v);
        }
        acc
    }

    pub fn contains(&self, p: &ProjPoint3) -> bool {
        self.eval(p).is_zero()
    }

    pub fn lift(&self, tower: &Tower, k: usize) -> Hyperplane {
        let coeffs = self
            .coeffs
            .clone()
            .map(|c| tower.lift(&c, k).expect("liftable coefficients"));
        Hyperplane { coeffs }
    }

    pub fn key(&self) -> [u64; 4] {
        [
            self.coeffs[0].packed(),
            self.coeffs[1].packed(),
            self.coeffs[2].packed(),
            self.coeffs[3].packed(),
        ]
    }
}

/// A line of P^3 as the RREF basis of the hyperplane pencil through it.
#[derive(Clone, PartialEq, Eq)]
pub struct Line3 {
    rows: [[FieldElement; 4]; 2],
}

impl std::fmt::Debug for Line3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (h1, h2) = self.pencil_basis();
        write!(f, "{{{:?}, {:?}}}", h1, h2)
    }
}

impl Line3 {
    fn from_rows(ctx: &Arc<FieldCtx>, rows: Vec<Vec<FieldElement>>) -> Result<Line3, GeomError> {
        let mut m = rows;
        let rank = linalg::rref(&mut m);
        if rank != 2 {
            return Err(GeomError::DependentHyperplanes);
        }
        let take = |r: &[FieldElement]| -> [FieldElement; 4] {
            [r[0].clone(), r[1].clone(), r[2].clone(), r[3].clone()]
        };
        let _ = ctx;
        Ok(Line3 {
            rows: [take(&m[0]), take(&m[1])],
        })
    }

    pub fn from_hyperplanes(h1: &Hyperplane, h2: &Hyperplane) -> Result<Line3, GeomError> {
        if !h1.ctx().same(h2.ctx()) {
            return Err(GeomError::ContextMismatch);
        }
        Line3::from_rows(
            h1.ctx(),
            vec![h1.coeffs.to_vec(), h2.coeffs.to_vec()],
        )
    }

    /// The line through two distinct points: the kernel of their coordinate
    /// matrix is exactly the pencil of hyperplanes containing both.
    pub fn through(p: &ProjPoint3, q: &ProjPoint3) -> Result<Line3, GeomError> {
        if !p.ctx().same(q.ctx()) {
            return Err(GeomError::ContextMismatch);
        }
        if p == q {
            return Err(GeomError::CoincidentPoints);
        }
        let m = vec![p.coords.to_vec(), q.coords.to_vec()];
        let basis = linalg::kernel_basis(p.ctx(), m, 4);
        debug_assert_eq!(basis.len(), 2);
        Line3::from_rows(p.ctx(), basis)
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.rows[0][0].ctx()
    }

    /// The canonical hyperplane pair cutting the line.
    pub fn pencil_basis(&self) -> (Hyperplane, Hyperplane) {
        (
            Hyperplane {
                coeffs: self.rows[0].clone(),
            },
            Hyperplane {
                coeffs: self.rows[1].clone(),
            },
        )
    }

    pub fn contains_point(&self, p: &ProjPoint3) -> bool {
        let (h1, h2) = self.pencil_basis();
        h1.contains(p) && h2.contains(p)
    }

    /// Is `h` a member of the pencil through this line (so the line lies in
    /// the hyperplane)?
    pub fn in_hyperplane(&self, h: &Hyperplane) -> bool {
        let mut m = vec![
            self.rows[0].to_vec(),
            self.rows[1].to_vec(),
            h.coeffs.to_vec(),
        ];
        linalg::rref(&mut m) == 2
    }

    /// Two independent points spanning the line, from the kernel of the
    /// pencil matrix, in canonical order.
    pub fn spanning_points(&self) -> (ProjPoint3, ProjPoint3) {
        let m = vec![self.rows[0].to_vec(), self.rows[1].to_vec()];
        let basis = linalg::kernel_basis(self.ctx(), m, 4);
        debug_assert_eq!(basis.len(), 2);
        let mk = |v: &[FieldElement]| {
            ProjPoint3::new([v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()]).unwrap()
        };
        (mk(&basis[0]), mk(&basis[1]))
    }

    /// All coefficients in the image of tower level 1?
    pub fn is_base_line(&self, tower: &Tower) -> bool {
        self.lower(tower, 1).is_some()
    }

    pub fn lower(&self, tower: &Tower, j: usize) -> Option<Line3> {
        let mut rows = Vec::new();
        for r in &self.rows {
            let mut row = Vec::with_capacity(4);
            for c in r {
                row.push(tower.lower(c, j)?);
            }
            rows.push(row);
        }
        let take = |r: &[FieldElement]| -> [FieldElement; 4] {
            [r[0].clone(), r[1].clone(), r[2].clone(), r[3].clone()]
        };
        Some(Line3 {
            rows: [take(&rows[0]), take(&rows[1])], // RREF shape is preserved
        })
    }

    pub fn lift(&self, tower: &Tower, k: usize) -> Line3 {
        let lift_row = |r: &[FieldElement; 4]| -> [FieldElement; 4] {
            r.clone().map(|c| tower.lift(&c, k).expect("liftable line"))
        };
        Line3 {
            rows: [lift_row(&self.rows[0]), lift_row(&self.rows[1])],
        }
    }

    /// Flattened packed entries; a total order on canonical lines.
    pub fn key(&self) -> [u64; 8] {
        let mut k = [0u64; 8];
        for (i, c) in self.rows[0].iter().chain(self.rows[1].iter()).enumerate() {
            k[i] = c.packed();
        }
        k
    }
}

/// Every line inside the plane {Z = 0} over the coefficient field: one per
/// point (a : b : d) of the dual projective plane, as {aX + bY + dW = Z = 0}.
/// Sorted by canonical key, q^2 + q + 1 in total.
pub fn enumerate_plane_lines(ctx: &Arc<FieldCtx>) -> Vec<Line3> {
    let z_plane = Hyperplane::new([ctx.zero(), ctx.zero(), ctx.one(), ctx.zero()]).unwrap();
    let mut reps: Vec<[FieldElement; 4]> = Vec::new();
    for b in ctx.iter_elements() {
        for d in ctx.iter_elements() {
            reps.push([ctx.one(), b.clone(), ctx.zero(), d.clone()]);
        }
    }
    for d in ctx.iter_elements() {
        reps.push([ctx.zero(), ctx.one(), ctx.zero(), d]);
    }
    reps.push([ctx.zero(), ctx.zero(), ctx.zero(), ctx.one()]);
    let mut lines: Vec<Line3> = reps
        .into_iter()
        .map(|coeffs| {
            let h = Hyperplane::new(coeffs).unwrap();
            Line3::from_hyperplanes(&z_plane, &h).unwrap()
        })
        .collect();
    lines.sort_by_key(|l| l.key());
    lines.dedup();
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DEFAULT_CARDINALITY_BOUND;

    fn pt(ctx: &Arc<FieldCtx>, v: [u64; 4]) -> ProjPoint3 {
        ProjPoint3::new(v.map(|c| ctx.from_packed(c))).unwrap()
    }

    fn hp(ctx: &Arc<FieldCtx>, v: [u64; 4]) -> Hyperplane {
        Hyperplane::new(v.map(|c| ctx.from_packed(c))).unwrap()
    }

    #[test]
    fn points_normalize_projectively() {
        let f5 = FieldCtx::build(5, 1).unwrap();
        assert_eq!(pt(&f5, [2, 4, 0, 2]), pt(&f5, [1, 2, 0, 1]));
        assert_eq!(pt(&f5, [0, 3, 3, 1]), pt(&f5, [0, 1, 1, 2]));
        assert_eq!(
            ProjPoint3::new([f5.zero(), f5.zero(), f5.zero(), f5.zero()]).unwrap_err(),
            GeomError::ZeroVector
        );
    }

    #[test]
    fn line_constructions_agree() {
        let f3 = FieldCtx::build(3, 1).unwrap();
        // the line {Y = Z = 0} through (1:0:0:0) and (0:0:0:1)
        let via_planes = Line3::from_hyperplanes(
            &hp(&f3, [0, 1, 0, 0]),
            &hp(&f3, [0, 0, 1, 0]),
        )
        .unwrap();
        let via_points =
            Line3::through(&pt(&f3, [1, 0, 0, 0]), &pt(&f3, [0, 0, 0, 1])).unwrap();
        assert_eq!(via_planes, via_points);
        assert!(via_planes.contains_point(&pt(&f3, [1, 0, 0, 2])));
        assert!(!via_planes.contains_point(&pt(&f3, [1, 1, 0, 0])));
    }

    #[test]
    fn canonical_form_is_independent_of_presentation() {
        let f7 = FieldCtx::build(7, 1).unwrap();
        let p = pt(&f7, [1, 2, 3, 4]);
        let q = pt(&f7, [2, 0, 5, 1]);
        let l1 = Line3::through(&p, &q).unwrap();
        // replace the spanning pair with two other points of the line
        let (a, b) = l1.spanning_points();
        assert!(l1.contains_point(&a) && l1.contains_point(&b));
        let mixed = ProjPoint3::new([
            &a.coords()[0] + &b.coords()[0],
            &a.coords()[1] + &b.coords()[1],
            &a.coords()[2] + &b.coords()[2],
            &a.coords()[3] + &b.coords()[3],
        ])
        .unwrap();
        let l2 = Line3::through(&a, &mixed).unwrap();
        assert_eq!(l1, l2);
        // and a rescaled hyperplane pair gives the same rows
        let (h1, h2) = l1.pencil_basis();
        let two = f7.from_packed(2);
        let h1s = Hyperplane::new(h1.coeffs().clone().map(|c| &c * &two)).unwrap();
        let l3 = Line3::from_hyperplanes(&h1s, &h2).unwrap();
        assert_eq!(l1, l3);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let f3 = FieldCtx::build(3, 1).unwrap();
        let p = pt(&f3, [1, 0, 0, 0]);
        assert_eq!(
            Line3::through(&p, &p).unwrap_err(),
            GeomError::CoincidentPoints
        );
        let h = hp(&f3, [1, 1, 0, 0]);
        let h2 = hp(&f3, [2, 2, 0, 0]); // same hyperplane rescaled
        assert_eq!(
            Line3::from_hyperplanes(&h, &h2).unwrap_err(),
            GeomError::DependentHyperplanes
        );
    }

    #[test]
    fn pencil_membership() {
        let f3 = FieldCtx::build(3, 1).unwrap();
        let l = Line3::from_hyperplanes(&hp(&f3, [0, 1, 0, 0]), &hp(&f3, [0, 0, 1, 0])).unwrap();
        // Y + Z = 0 contains the line; X = 0 does not
        assert!(l.in_hyperplane(&hp(&f3, [0, 1, 1, 0])));
        assert!(!l.in_hyperplane(&hp(&f3, [1, 0, 0, 0])));
    }

    #[test]
    fn plane_line_census() {
        for (p, e) in [(3u64, 1usize), (2, 2)] {
            let ctx = FieldCtx::build(p, e).unwrap();
            let q = ctx.cardinality();
            let z_plane = hp(&ctx, [0, 0, 1, 0]);
            let lines = enumerate_plane_lines(&ctx);
            assert_eq!(lines.len() as u64, q * q + q + 1);
            for l in &lines {
                assert!(l.in_hyperplane(&z_plane));
            }
            // strictly sorted: no duplicates survive
            for w in lines.windows(2) {
                assert!(w[0].key() < w[1].key());
            }
        }
    }

    #[test]
    fn lines_lift_and_lower_through_the_tower() {
        let t = Tower::new(3, 1, &[1, 2], DEFAULT_CARDINALITY_BOUND).unwrap();
        let f3 = t.level(1).unwrap().clone();
        let l = Line3::from_hyperplanes(&hp(&f3, [1, 2, 0, 1]), &hp(&f3, [0, 0, 1, 2])).unwrap();
        let up = l.lift(&t, 2);
        assert!(up.is_base_line(&t));
        assert_eq!(up.lower(&t, 1).unwrap(), l);
        // a genuinely quadratic line does not lower
        let f9 = t.level(2).unwrap().clone();
        let g = f9.generator();
        let wild = Line3::from_hyperplanes(
            &Hyperplane::new([f9.one(), g.clone(), f9.zero(), f9.zero()]).unwrap(),
            &Hyperplane::new([f9.zero(), f9.zero(), f9.one(), g]).unwrap(),
        )
        .unwrap();
        assert!(!wild.is_base_line(&t));
    }

    #[test]
    fn spanning_points_really_span() {
        let f4 = FieldCtx::build(2, 2).unwrap();
        let l = Line3::from_hyperplanes(&hp(&f4, [1, 1, 0, 0]), &hp(&f4, [0, 0, 1, 1])).unwrap();
        let (a, b) = l.spanning_points();
        assert_ne!(a, b);
        assert!(l.contains_point(&a));
        assert!(l.contains_point(&b));
        assert_eq!(Line3::through(&a, &b).unwrap(), l);
    }
}
