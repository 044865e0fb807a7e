//! The curve (x^q - x)(y^q - y) = c and its embedding into P^3.
//!
//! Points of the smooth model are either affine solutions (x, y) over some
//! tower level or one of the 2q points over the two poles: x has a simple
//! pole over each y = alpha in F_q, and symmetrically for y.  The map
//! phi = (x : y : 1 : xy) embeds everything into the quadric XY - ZW = 0;
//! the images of the pole points are (1 : 0 : 0 : alpha) and
//! (0 : 1 : 0 : alpha).
//!
//! All intersection theory here is exact: local expansions are computed in
//! closed form from the Artin-Schreier structure (the unique series solution
//! of u^q - u = h with u(0) = 0), and vanishing orders of hyperplanes are
//! read off those expansions.  A hyperplane never contains the whole curve
//! (1, x, y, xy are linearly independent functions), so every order is at
//! most the curve degree 2q and the default precision always suffices.

use std::sync::Arc;

use thiserror::Error;

use crate::field::{FieldCtx, FieldElement, FieldError, DEFAULT_CARDINALITY_BOUND};
use crate::geom::{GeomError, Hyperplane, Line3, ProjPoint3};
use crate::linalg;
use crate::poly::Poly;
use crate::series::{artin_schreier_sum, Series};
use crate::tower::Tower;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("the base field must have at least 3 elements, got {0}")]
    UnsupportedQ(u64),
    #[error("the curve constant c must be nonzero")]
    ZeroC,
    #[error("({x}, {y}) does not satisfy the curve equation")]
    NotOnCurve { x: u64, y: u64 },
    #[error("a linear constraint must involve x or y")]
    DegenerateConstraint,
    #[error("no vanishing order found within {0} series terms")]
    PrecisionExhausted(usize),
}

fn gcd_usize(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd_usize(b, a % b)
    }
}

fn lcm_usize(a: usize, b: usize) -> usize {
    a / gcd_usize(a, b) * b
}

/// A point of the smooth model.  Affine coordinates live at some tower
/// level; the pole points are defined over the base field, carrying the
/// finite value of the other coordinate function.
#[derive(Clone, Debug)]
pub enum CurvePoint {
    Affine { x: FieldElement, y: FieldElement },
    /// The point where x has its pole over y = y0 (y0 in F_q).
    XPole { y0: FieldElement },
    /// The point where y has its pole over x = x0 (x0 in F_q).
    YPole { x0: FieldElement },
}

/// A one-variable slice of the affine curve.
#[derive(Clone, Debug)]
pub enum AffineConstraint {
    XEquals(FieldElement),
    YEquals(FieldElement),
    /// a*x + b*y + d = 0 with (a, b) != (0, 0).
    Linear {
        a: FieldElement,
        b: FieldElement,
        d: FieldElement,
    },
}

/// Which local parameter an expansion is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalParameter {
    /// t = 1/x at a pole of x.
    InverseX,
    /// t = 1/y at a pole of y.
    InverseY,
    /// t = x - x0 at an affine point (valid everywhere: df/dy never
    /// vanishes on the affine curve).
    ShiftedX,
}

/// Power-series coordinates of the embedding along a local parameter.
#[derive(Clone, Debug)]
pub struct LocalExpansion {
    pub parameter: LocalParameter,
    /// X(t), Y(t), Z(t), W(t).
    pub coords: [Series; 4],
}

/// The full scheme-theoretic intersection of a line with the embedded curve.
/// `missing_multiplicity` counts intersection points (each transversal, so
/// with multiplicity 1) whose coordinates live outside the built tower; the
/// total is exact even when they cannot be materialized.
#[derive(Clone, Debug)]
pub struct LineIntersections {
    pub points: Vec<(CurvePoint, usize)>,
    pub missing_multiplicity: usize,
}

impl LineIntersections {
    pub fn total(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum::<usize>() + self.missing_multiplicity
    }
}

/// Curve parameters plus the extension tower the analysis runs in.
pub struct CurveParams {
    q: u64,
    c: FieldElement,
    tower: Arc<Tower>,
}

impl std::fmt::Debug for CurveParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Curve(q = {}, c = {})", self.q, self.c)
    }
}

impl CurveParams {
    /// Standard setup: levels 1..=6 of the tower, which is enough to
    /// materialize every point this crate needs for q up to 9.
    pub fn new(p: u64, e: usize, c_packed: u64) -> Result<CurveParams, CurveError> {
        Self::with_levels(p, e, c_packed, &[1, 2, 3, 4, 5, 6], DEFAULT_CARDINALITY_BOUND)
    }

    pub fn with_levels(
        p: u64,
        e: usize,
        c_packed: u64,
        levels: &[usize],
        bound: u64,
    ) -> Result<CurveParams, CurveError> {
        let tower = Arc::new(Tower::new(p, e, levels, bound)?);
        let base = tower.level(1)?.clone();
        let q = base.cardinality();
        if q < 3 {
            return Err(CurveError::UnsupportedQ(q));
        }
        if c_packed % q == 0 {
            return Err(CurveError::ZeroC);
        }
        let c = base.from_packed(c_packed % q);
        let params = CurveParams { q, c, tower };
        params.verify_quadric_pencil();
        Ok(params)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.tower.p()
    }

    pub fn c(&self) -> &FieldElement {
        &self.c
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn ctx(&self, k: usize) -> Result<&Arc<FieldCtx>, CurveError> {
        Ok(self.tower.level(k)?)
    }

    pub fn base_ctx(&self) -> &Arc<FieldCtx> {
        self.c.ctx()
    }

    fn c_at(&self, k: usize) -> FieldElement {
        self.tower.lift(&self.c, k).expect("c lifts to any level")
    }

    /// (x^q - x)(y^q - y) - c over the coordinates' field.
    pub fn curve_value(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let k = self
            .tower
            .level_of(x.ctx())
            .expect("coordinates belong to the tower");
        let xq = x.pow(self.q as u128);
        let yq = y.pow(self.q as u128);
        &(&(&xq - x) * &(&yq - y)) - &self.c_at(k)
    }

    /// Validated affine point; both coordinates must share a tower level.
    pub fn affine_point(
        &self,
        x: FieldElement,
        y: FieldElement,
    ) -> Result<CurvePoint, CurveError> {
        if !x.ctx().same(y.ctx()) || self.tower.level_of(x.ctx()).is_none() {
            return Err(CurveError::Field(FieldError::ContextMismatch));
        }
        if !self.curve_value(&x, &y).is_zero() {
            return Err(CurveError::NotOnCurve {
                x: x.packed(),
                y: y.packed(),
            });
        }
        Ok(CurvePoint::Affine { x, y })
    }

    /// The 2q points at infinity, poles of x first, in packed order.
    pub fn infinite_points(&self) -> Vec<CurvePoint> {
        let base = self.base_ctx();
        let mut pts = Vec::with_capacity(2 * self.q as usize);
        for a in base.iter_elements() {
            pts.push(CurvePoint::XPole { y0: a });
        }
        for a in base.iter_elements() {
            pts.push(CurvePoint::YPole { x0: a });
        }
        pts
    }

    /// phi = (x : y : 1 : xy), extended to the poles by clearing the pole.
    pub fn embed(&self, pt: &CurvePoint) -> ProjPoint3 {
        match pt {
            CurvePoint::Affine { x, y } => {
                let ctx = x.ctx();
                ProjPoint3::new([x.clone(), y.clone(), ctx.one(), x * y]).unwrap()
            }
            CurvePoint::XPole { y0 } => {
                let ctx = y0.ctx();
                ProjPoint3::new([ctx.one(), ctx.zero(), ctx.zero(), y0.clone()]).unwrap()
            }
            CurvePoint::YPole { x0 } => {
                let ctx = x0.ctx();
                ProjPoint3::new([ctx.zero(), ctx.one(), ctx.zero(), x0.clone()]).unwrap()
            }
        }
    }

    /// Tower level the point's coordinates are stored at.
    pub fn point_level(&self, pt: &CurvePoint) -> usize {
        match pt {
            CurvePoint::Affine { x, .. } => self
                .tower
                .level_of(x.ctx())
                .expect("point belongs to the tower"),
            _ => 1,
        }
    }

    /// Canonical identity key: variant tag, then minimal level, then packed
    /// coordinates at that level.  Equal keys mean equal geometric points.
    pub fn point_key(&self, pt: &CurvePoint) -> [u64; 4] {
        match pt {
            CurvePoint::Affine { x, y } => {
                let k = self.point_level(pt);
                let mut best = (k, x.clone(), y.clone());
                for j in self.tower.level_ids() {
                    if j < k && k % j == 0 {
                        if let (Some(xj), Some(yj)) =
                            (self.tower.lower(x, j), self.tower.lower(y, j))
                        {
                            best = (j, xj, yj);
                            break;
                        }
                    }
                }
                [0, best.0 as u64, best.1.packed(), best.2.packed()]
            }
            CurvePoint::XPole { y0 } => [1, 1, y0.packed(), 0],
            CurvePoint::YPole { x0 } => [2, 1, x0.packed(), 0],
        }
    }

    pub fn points_equal(&self, a: &CurvePoint, b: &CurvePoint) -> bool {
        self.point_key(a) == self.point_key(b)
    }

    /// Does a projective point satisfy XY = ZW?
    pub fn on_quadric(&self, v: &ProjPoint3) -> bool {
        let c = v.coords();
        &c[0] * &c[1] == &c[2] * &c[3]
    }

    /// All affine curve points over the constraint's field satisfying it.
    pub fn solve_affine(
        &self,
        constraint: &AffineConstraint,
    ) -> Result<Vec<CurvePoint>, CurveError> {
        let q = self.q;
        let mut out = match constraint {
            AffineConstraint::XEquals(x0) => {
                let ctx = x0.ctx().clone();
                let a = &x0.pow(q as u128) - x0;
                if a.is_zero() {
                    Vec::new() // the whole fiber of x sits at infinity
                } else {
                    let k = self.tower.level_of(&ctx).ok_or(FieldError::ContextMismatch)?;
                    let d = &self.c_at(k) * &a.inv()?;
                    let mut coeffs = vec![ctx.zero(); q as usize + 1];
                    coeffs[0] = -&d;
                    coeffs[1] = -&ctx.one();
                    coeffs[q as usize] = ctx.one();
                    let f = Poly::new(&ctx, coeffs);
                    f.roots()?
                        .into_iter()
                        .map(|(y, _)| CurvePoint::Affine {
                            x: x0.clone(),
                            y,
                        })
                        .collect()
                }
            }
            AffineConstraint::YEquals(y0) => {
                let ctx = y0.ctx().clone();
                let a = &y0.pow(q as u128) - y0;
                if a.is_zero() {
                    Vec::new()
                } else {
                    let k = self.tower.level_of(&ctx).ok_or(FieldError::ContextMismatch)?;
                    let d = &self.c_at(k) * &a.inv()?;
                    let mut coeffs = vec![ctx.zero(); q as usize + 1];
                    coeffs[0] = -&d;
                    coeffs[1] = -&ctx.one();
                    coeffs[q as usize] = ctx.one();
                    let f = Poly::new(&ctx, coeffs);
                    f.roots()?
                        .into_iter()
                        .map(|(x, _)| CurvePoint::Affine {
                            x,
                            y: y0.clone(),
                        })
                        .collect()
                }
            }
            AffineConstraint::Linear { a, b, d } => {
                if b.is_zero() {
                    if a.is_zero() {
                        return Err(CurveError::DegenerateConstraint);
                    }
                    let x0 = -&(d * &a.inv()?);
                    return self.solve_affine(&AffineConstraint::XEquals(x0));
                }
                if a.is_zero() {
                    let y0 = -&(d * &b.inv()?);
                    return self.solve_affine(&AffineConstraint::YEquals(y0));
                }
                // y = alpha*x + beta
                let ctx = a.ctx().clone();
                let k = self.tower.level_of(&ctx).ok_or(FieldError::ContextMismatch)?;
                let binv = b.inv()?;
                let alpha = -&(a * &binv);
                let beta = -&(d * &binv);
                let x = Poly::x(&ctx);
                let xq_minus_x = x.q_power(q).sub(&x);
                let line_poly = Poly::new(&ctx, vec![beta.clone(), alpha.clone()]);
                let rhs = line_poly.q_power(q).sub(&line_poly);
                let f = xq_minus_x
                    .mul(&rhs)
                    .sub(&Poly::constant(self.c_at(k)));
                debug_assert!(!f.is_zero(), "the curve contains no line");
                f.roots()?
                    .into_iter()
                    .map(|(x0, _)| {
                        let y0 = &(&alpha * &x0) + &beta;
                        debug_assert!(self.curve_value(&x0, &y0).is_zero());
                        CurvePoint::Affine { x: x0, y: y0 }
                    })
                    .collect()
            }
        };
        out.sort_by_key(|pt| self.point_key(pt));
        Ok(out)
    }

    /// Every curve point rational over the hyperplane's field that lies on
    /// the hyperplane, plus the base-field points at infinity on it.
    pub fn hyperplane_section(&self, h: &Hyperplane) -> Result<Vec<CurvePoint>, CurveError> {
        let ctx = h.ctx().clone();
        let k = self.tower.level_of(&ctx).ok_or(FieldError::ContextMismatch)?;
        let q = self.q;
        let [hx, hy, hz, hw] = h.coeffs().clone();
        let mut pts: Vec<CurvePoint> = Vec::new();
        if !hw.is_zero() {
            // y*(hy + hw*x) = -(hx*x + hz); clear denominators in the curve
            // equation to a degree <= 2q polynomial in x alone
            let u = Poly::new(&ctx, vec![-&hz, -&hx]);
            let v = Poly::new(&ctx, vec![hy.clone(), hw.clone()]);
            let x = Poly::x(&ctx);
            let xq_minus_x = x.q_power(q).sub(&x);
            let section = xq_minus_x
                .mul(&u.q_power(q).sub(&u.mul(&v.pow_small(q as usize - 1))))
                .sub(&v.q_power(q).scale(&self.c_at(k)));
            assert!(!section.is_zero(), "a hyperplane cannot contain the curve");
            for (x0, _) in section.roots()? {
                let vx = v.eval(&x0);
                if !vx.is_zero() {
                    let y0 = &u.eval(&x0) * &vx.inv()?;
                    debug_assert!(self.curve_value(&x0, &y0).is_zero());
                    pts.push(CurvePoint::Affine { x: x0, y: y0 });
                } else if u.eval(&x0).is_zero() {
                    // hy + hw*x0 = 0 and hx*x0 + hz = 0: the hyperplane
                    // contains the entire ruling x = x0
                    pts.extend(self.solve_affine(&AffineConstraint::XEquals(x0))?);
                }
                // otherwise x0 is an artifact of clearing denominators
            }
        } else if !hx.is_zero() || !hy.is_zero() {
            pts = self.solve_affine(&AffineConstraint::Linear {
                a: hx,
                b: hy,
                d: hz,
            })?;
        }
        // (the remaining case is the plane Z = 0: no affine points at all)
        for pt in self.infinite_points() {
            let v = self.embed(&pt).lift(&self.tower, k);
            if h.contains(&v) {
                pts.push(pt);
            }
        }
        pts.sort_by_key(|pt| self.point_key(pt));
        Ok(pts)
    }

    /// Series expansion of the embedding at `pt`, over tower level `k`
    /// (a multiple of the point's level), with `prec` coefficients.
    pub fn local_expansion(
        &self,
        pt: &CurvePoint,
        k: usize,
        prec: usize,
    ) -> Result<LocalExpansion, CurveError> {
        let ctx = self.tower.level(k)?.clone();
        let q = self.q;
        let qu = q as usize;
        let c = self.c_at(k);
        let t = Series::t(&ctx, prec);
        match pt {
            CurvePoint::XPole { y0 } => {
                // t = 1/x: x^q - x = t^{-q}(1 - t^{q-1}), so
                // (y - y0)^q - (y - y0) = c t^q / (1 - t^{q-1})
                let alpha = self.tower.lift(y0, k)?;
                let tq = t.clone().mul_t_power(qu - 1).truncate(prec);
                let denom = Series::constant(&ctx.one(), prec)
                    .sub(&t.clone().mul_t_power(qu - 2).truncate(prec));
                let h = tq.scale(&c).mul(&denom.inv());
                let w = artin_schreier_sum(&h, q);
                let y = Series::constant(&alpha, prec).add(&w);
                Ok(LocalExpansion {
                    parameter: LocalParameter::InverseX,
                    // (x : y : 1 : xy) * t = (1 : yt : t : y)
                    coords: [
                        Series::constant(&ctx.one(), prec),
                        t.mul(&y),
                        t,
                        y,
                    ],
                })
            }
            CurvePoint::YPole { x0 } => {
                let alpha = self.tower.lift(x0, k)?;
                let tq = t.clone().mul_t_power(qu - 1).truncate(prec);
                let denom = Series::constant(&ctx.one(), prec)
                    .sub(&t.clone().mul_t_power(qu - 2).truncate(prec));
                let h = tq.scale(&c).mul(&denom.inv());
                let w = artin_schreier_sum(&h, q);
                let x = Series::constant(&alpha, prec).add(&w);
                Ok(LocalExpansion {
                    parameter: LocalParameter::InverseY,
                    // (x : y : 1 : xy) * t = (xt : 1 : t : x)
                    coords: [
                        t.mul(&x),
                        Series::constant(&ctx.one(), prec),
                        t,
                        x,
                    ],
                })
            }
            CurvePoint::Affine { x, y } => {
                let x0 = self.tower.lift(x, k)?;
                let y0 = self.tower.lift(y, k)?;
                // t = x - x0 is a uniformizer everywhere on the affine part:
                // (y - y0)^q - (y - y0) = c/(A + t^q - t) - c/A, A = x0^q - x0
                let a = &x0.pow(q as u128) - &x0;
                debug_assert!(!a.is_zero());
                let ainv = a.inv()?;
                let inner = Series::constant(&a, prec)
                    .add(&t.q_power(q))
                    .sub(&t);
                let h = inner
                    .inv()
                    .scale(&c)
                    .sub(&Series::constant(&(&c * &ainv), prec));
                let w = artin_schreier_sum(&h, q);
                let xs = Series::constant(&x0, prec).add(&t);
                let ys = Series::constant(&y0, prec).add(&w);
                Ok(LocalExpansion {
                    parameter: LocalParameter::ShiftedX,
                    coords: [
                        xs.clone(),
                        ys.clone(),
                        Series::constant(&ctx.one(), prec),
                        xs.mul(&ys),
                    ],
                })
            }
        }
    }

    /// Vanishing order of a hyperplane at a curve point (0 when the point is
    /// not on it).  Always at most 2q, the curve degree.
    pub fn ord_hyperplane(
        &self,
        pt: &CurvePoint,
        h: &Hyperplane,
    ) -> Result<usize, CurveError> {
        let kp = self.point_level(pt);
        let kh = self
            .tower
            .level_of(h.ctx())
            .ok_or(FieldError::ContextMismatch)?;
        let k = lcm_usize(kp, kh);
        let hk = h.lift(&self.tower, k);
        let q = self.q as usize;
        let mut prec = 2 * q + 2;
        loop {
            let exp = self.local_expansion(pt, k, prec)?;
            let mut series = Series::zero(&self.tower.level(k)?.clone(), prec);
            for (coef, coord) in hk.coeffs().iter().zip(&exp.coords) {
                if !coef.is_zero() {
                    series = series.add(&coord.scale(coef));
                }
            }
            if let Some(o) = series.order() {
                return Ok(o);
            }
            prec *= 2;
            if prec > 8 * q + 8 {
                return Err(CurveError::PrecisionExhausted(prec / 2));
            }
        }
    }

    /// Intersection multiplicity of a line with the curve at a point on it:
    /// the smaller vanishing order among the line's two pencil generators.
    pub fn intersection_multiplicity(
        &self,
        pt: &CurvePoint,
        line: &Line3,
    ) -> Result<usize, CurveError> {
        let (h1, h2) = line.pencil_basis();
        let o1 = self.ord_hyperplane(pt, &h1)?;
        let o2 = self.ord_hyperplane(pt, &h2)?;
        Ok(o1.min(o2))
    }

    /// The scheme intersection of a line with the embedded curve.
    ///
    /// Lines inside the quadric XY = ZW are rulings and meet the curve in
    /// degree q; all other lines meet the quadric, hence the curve, in at
    /// most two points.  Ruling fibers whose residue field falls outside the
    /// tower are counted exactly (they are simple points of an x^q - x = d
    /// equation) but reported through `missing_multiplicity`.
    pub fn line_intersections(&self, line: &Line3) -> Result<LineIntersections, CurveError> {
        // work at the line's minimal field of definition
        let mut j = self
            .tower
            .level_of(line.ctx())
            .ok_or(FieldError::ContextMismatch)?;
        let mut line_j = line.clone();
        for jj in self.tower.level_ids() {
            if jj < j && j % jj == 0 {
                if let Some(l) = line.lower(&self.tower, jj) {
                    j = jj;
                    line_j = l;
                    break;
                }
            }
        }
        let ctx = self.tower.level(j)?.clone();
        let (pa, pb) = line_j.spanning_points();
        let (kappa, rho, nu) = self.quadric_restriction(&line_j);
        if kappa.is_zero() && rho.is_zero() && nu.is_zero() {
            self.ruling_intersections(&line_j, j)
        } else {
            self.transversal_intersections(&line_j, j, &ctx, &pa, &pb, &kappa, &rho, &nu)
        }
    }

    /// Coefficients (kappa, rho, nu) of XY - ZW restricted to the line,
    /// parameterized as lambda*A + mu*B over its two spanning points:
    /// the form becomes kappa*lambda^2 + rho*lambda*mu + nu*mu^2.
    fn quadric_restriction(
        &self,
        line: &Line3,
    ) -> (FieldElement, FieldElement, FieldElement) {
        let (pa, pb) = line.spanning_points();
        let quad = |v: &ProjPoint3| {
            let c = v.coords();
            &(&c[0] * &c[1]) - &(&c[2] * &c[3])
        };
        let ca = pa.coords();
        let cb = pb.coords();
        // the cross term written additively, safe in characteristic 2
        let rho = &(&(&ca[0] * &cb[1]) + &(&ca[1] * &cb[0]))
            - &(&(&ca[2] * &cb[3]) + &(&ca[3] * &cb[2]));
        (quad(&pa), rho, quad(&pb))
    }

    /// Is the line one of the rulings of XY = ZW?
    pub fn line_in_quadric(&self, line: &Line3) -> bool {
        let (kappa, rho, nu) = self.quadric_restriction(line);
        kappa.is_zero() && rho.is_zero() && nu.is_zero()
    }

    /// Intersections for a line inside the quadric.  The Segre factor that is
    /// constant along the line tells which ruling family it belongs to.
    fn ruling_intersections(
        &self,
        line: &Line3,
        j: usize,
    ) -> Result<LineIntersections, CurveError> {
        let (pa, pb) = line.spanning_points();
        // (X : Z) equals (W : Y) on the quadric and records the x-value
        let x_factor = |v: &ProjPoint3| -> (FieldElement, FieldElement) {
            let c = v.coords();
            if !c[0].is_zero() || !c[2].is_zero() {
                (c[0].clone(), c[2].clone())
            } else {
                (c[3].clone(), c[1].clone())
            }
        };
        let y_factor = |v: &ProjPoint3| -> (FieldElement, FieldElement) {
            let c = v.coords();
            if !c[1].is_zero() || !c[2].is_zero() {
                (c[1].clone(), c[2].clone())
            } else {
                (c[3].clone(), c[0].clone())
            }
        };
        let proj_eq = |u: &(FieldElement, FieldElement), v: &(FieldElement, FieldElement)| {
            &u.0 * &v.1 == &u.1 * &v.0
        };
        let fa = x_factor(&pa);
        let fb = x_factor(&pb);
        if proj_eq(&fa, &fb) {
            // constant x: the ruling x = a (or the line at x = infinity)
            if fa.1.is_zero() {
                // every pole of x lies on this line; the pencil contains
                // Z = 0, which vanishes to order exactly 1 there
                let pts = self
                    .base_ctx()
                    .iter_elements()
                    .map(|a| (CurvePoint::XPole { y0: a }, 1))
                    .collect();
                return Ok(LineIntersections {
                    points: pts,
                    missing_multiplicity: 0,
                });
            }
            let a = &fa.0 * &fa.1.inv()?;
            if let Some(a1) = self.tower.lower(&a, 1) {
                // tangent case: the fiber of x = a1 in F_q degenerates to
                // the single pole of y there, with full multiplicity q
                let pt = CurvePoint::YPole { x0: a1 };
                let m = self.intersection_multiplicity(&pt, line)?;
                debug_assert_eq!(m, self.q as usize);
                return Ok(LineIntersections {
                    points: vec![(pt, m)],
                    missing_multiplicity: 0,
                });
            }
            self.ruling_fiber(&AffineConstraintAt::X(a), j)
        } else {
            let ga = y_factor(&pa);
            debug_assert!(proj_eq(&ga, &y_factor(&pb)));
            if ga.1.is_zero() {
                let pts = self
                    .base_ctx()
                    .iter_elements()
                    .map(|a| (CurvePoint::YPole { x0: a }, 1))
                    .collect();
                return Ok(LineIntersections {
                    points: pts,
                    missing_multiplicity: 0,
                });
            }
            let a = &ga.0 * &ga.1.inv()?;
            if let Some(a1) = self.tower.lower(&a, 1) {
                let pt = CurvePoint::XPole { y0: a1 };
                let m = self.intersection_multiplicity(&pt, line)?;
                debug_assert_eq!(m, self.q as usize);
                return Ok(LineIntersections {
                    points: vec![(pt, m)],
                    missing_multiplicity: 0,
                });
            }
            self.ruling_fiber(&AffineConstraintAt::Y(a), j)
        }
    }

    /// Solve a non-degenerate ruling fiber (x = a or y = a with a outside
    /// F_q) over ascending tower levels.  The solution set of the associated
    /// Artin-Schreier equation is a coset of F_q, so each level holds either
    /// all q points or none; points outside every level are transversal and
    /// are counted as missing.
    fn ruling_fiber(
        &self,
        at: &AffineConstraintAt,
        j: usize,
    ) -> Result<LineIntersections, CurveError> {
        let q = self.q as usize;
        for k in self.tower.level_ids().collect::<Vec<_>>() {
            if k % j != 0 {
                continue;
            }
            let constraint = match at {
                AffineConstraintAt::X(a) => {
                    AffineConstraint::XEquals(self.tower.lift(a, k)?)
                }
                AffineConstraintAt::Y(a) => {
                    AffineConstraint::YEquals(self.tower.lift(a, k)?)
                }
            };
            let sols = self.solve_affine(&constraint)?;
            if !sols.is_empty() {
                debug_assert_eq!(sols.len(), q);
                // the pencil of a ruling contains X - aZ (resp. Y - aZ),
                // which is the local parameter itself: multiplicity 1
                return Ok(LineIntersections {
                    points: sols.into_iter().map(|p| (p, 1)).collect(),
                    missing_multiplicity: 0,
                });
            }
        }
        Ok(LineIntersections {
            points: Vec::new(),
            missing_multiplicity: q,
        })
    }

    /// Intersections for a line not contained in the quadric: restrict
    /// XY - ZW to the line, split the resulting binary quadratic over a
    /// quadratic extension, and test each root against the curve.
    #[allow(clippy::too_many_arguments)]
    fn transversal_intersections(
        &self,
        line: &Line3,
        j: usize,
        ctx: &Arc<FieldCtx>,
        pa: &ProjPoint3,
        pb: &ProjPoint3,
        kappa: &FieldElement,
        rho: &FieldElement,
        nu: &FieldElement,
    ) -> Result<LineIntersections, CurveError> {
        // candidates as (lambda, mu) coefficients over a level k >= j
        let mut candidates: Vec<(usize, FieldElement, FieldElement)> = Vec::new();
        let k2 = 2 * j;
        let solve_level = if self.tower.level(k2).is_ok() { k2 } else { j };
        let sctx = self.tower.level(solve_level)?.clone();
        let lift = |x: &FieldElement| self.tower.lift(x, solve_level).unwrap();
        if kappa.is_zero() {
            // (1 : 0) is a root; the other root is linear or absent
            candidates.push((j, ctx.one(), ctx.zero()));
            if !rho.is_zero() {
                let lam = -&(nu * &rho.inv()?);
                candidates.push((j, lam, ctx.one()));
            }
        } else {
            let f = Poly::new(&sctx, vec![lift(nu), lift(rho), lift(kappa)]);
            for (lam, _) in f.roots()? {
                candidates.push((solve_level, lam, sctx.one()));
            }
        }
        let mut points = Vec::new();
        for (k, lam, mu) in candidates {
            let a = pa.lift(&self.tower, k);
            let b = pb.lift(&self.tower, k);
            let coord = |i: usize| &(&lam * &a.coords()[i]) + &(&mu * &b.coords()[i]);
            let v = match ProjPoint3::new([coord(0), coord(1), coord(2), coord(3)]) {
                Ok(v) => v,
                Err(_) => continue, // (lambda, mu) = (0, 0) never happens
            };
            debug_assert!(self.on_quadric(&v));
            let vc = v.coords();
            let pt = if !vc[2].is_zero() {
                let zinv = vc[2].inv()?;
                let x = &vc[0] * &zinv;
                let y = &vc[1] * &zinv;
                if self.curve_value(&x, &y).is_zero() {
                    Some(CurvePoint::Affine { x, y })
                } else {
                    None
                }
            } else if !vc[0].is_zero() && vc[1].is_zero() {
                // (1 : 0 : 0 : w): a pole of x iff w is in the base field
                let w = &vc[3] * &vc[0].inv()?;
                self.tower.lower(&w, 1).map(|y0| CurvePoint::XPole { y0 })
            } else if vc[0].is_zero() && !vc[1].is_zero() {
                let w = &vc[3] * &vc[1].inv()?;
                self.tower.lower(&w, 1).map(|x0| CurvePoint::YPole { x0 })
            } else {
                // X = Y = Z = 0 is the quadric's own vertex point of the
                // two rulings through (0:0:0:1); it is not on the curve
                None
            };
            if let Some(pt) = pt {
                let m = self.intersection_multiplicity(&pt, line)?;
                debug_assert!(m >= 1);
                points.push((pt, m));
            }
        }
        points.sort_by_key(|(p, _)| self.point_key(p));
        Ok(LineIntersections {
            points,
            missing_multiplicity: 0,
        })
    }

    /// The space of quadrics through the embedded curve is one-dimensional,
    /// spanned by XY - ZW.  Checked at construction by evaluating all ten
    /// quadric monomials at enough curve points for a rank-9 system.
    fn verify_quadric_pencil(&self) {
        let Ok(ctx2) = self.tower.level(2) else {
            return; // custom towers without level 2 skip the check
        };
        let ctx2 = ctx2.clone();
        let mut pts: Vec<ProjPoint3> = self
            .infinite_points()
            .iter()
            .map(|pt| self.embed(pt).lift(&self.tower, 2))
            .collect();
        let mut extra = 0;
        for a in ctx2.iter_elements() {
            if self.tower.lower(&a, 1).is_some() {
                continue;
            }
            let sols = self
                .solve_affine(&AffineConstraint::XEquals(a))
                .expect("ruling fiber is solvable");
            for pt in sols {
                pts.push(self.embed(&pt));
            }
            extra += 1;
            if extra >= 2 {
                break;
            }
        }
        let rows: Vec<Vec<FieldElement>> = pts
            .iter()
            .map(|v| {
                let c = v.coords();
                vec![
                    &c[0] * &c[0],
                    &c[0] * &c[1],
                    &c[0] * &c[2],
                    &c[0] * &c[3],
                    &c[1] * &c[1],
                    &c[1] * &c[2],
                    &c[1] * &c[3],
                    &c[2] * &c[2],
                    &c[2] * &c[3],
                    &c[3] * &c[3],
                ]
            })
            .collect();
        let basis = linalg::kernel_basis(&ctx2, rows, 10);
        assert_eq!(basis.len(), 1, "quadrics through the curve must be a line");
        let v = &basis[0];
        // the kernel vector must be proportional to XY - ZW
        let xy = &v[1];
        assert!(!xy.is_zero());
        assert_eq!(&v[8], &-xy);
        for (i, c) in v.iter().enumerate() {
            if i != 1 && i != 8 {
                assert!(c.is_zero(), "unexpected quadric monomial {}", i);
            }
        }
    }
}

enum AffineConstraintAt {
    X(FieldElement),
    Y(FieldElement),
}
