//! Classification driver: whole-plane censuses, ruling-family scans,
//! negative controls, and hyperplane-section collinearity checks, all
//! over immutable curve state.  Per-line analyses fan out over rayon;
//! assembly is single-threaded and sorted by canonical line form.

use std::collections::HashSet;
use std::sync::Arc;

use asm_galois_core::aut::{full_group, AutError, GroupType};
use asm_galois_core::curve::{AffineConstraint, CurveError, CurveParams, CurvePoint};
use asm_galois_core::field::{FieldCtx, FieldElement};
use asm_galois_core::galois::{
    analyze, commutes_pointwise, commutes_with_projection, fiber, stabilizer,
    uniform_ramification, Classification, GaloisError,
};
use asm_galois_core::geom::{enumerate_plane_lines, GeomError, Hyperplane, Line3, ProjPoint3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Galois(#[from] GaloisError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Aut(#[from] AutError),
    #[error("q = {0} must be a prime power, at least 3")]
    UnsupportedQ(u64),
    #[error("c = {0} is not a nonzero element of the field with {1} elements")]
    BadConstant(u64, u64),
    #[error(
        "census mismatch for q={q}, c={c}: expected {expected:?} lines per family, found {got:?}"
    )]
    CountMismatch {
        q: u64,
        c: u64,
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("line outside the known families tested Galois for q={q}: {line}")]
    FalsePositive { q: u64, line: String },
    #[error("malformed {what}: {detail}")]
    BadSpec { what: &'static str, detail: String },
}

/// Factor q as p^e, when it is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, usize)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut rest = q;
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            return (rest == 1).then_some((p, e));
        }
        p += 1;
    }
    Some((q, 1))
}

/// Immutable shared state for one (q, c) run.
pub struct Workspace {
    params: CurveParams,
    q: u64,
    c: u64,
}

impl Workspace {
    pub fn new(q: u64, c: u64) -> Result<Workspace, DriverError> {
        let (p, e) = prime_power(q).ok_or(DriverError::UnsupportedQ(q))?;
        if q < 3 {
            return Err(DriverError::UnsupportedQ(q));
        }
        if c == 0 || c >= q {
            return Err(DriverError::BadConstant(c, q));
        }
        let params = CurveParams::new(p, e, c)?;
        Ok(Workspace { params, q, c })
    }

    pub fn params(&self) -> &CurveParams {
        &self.params
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn c(&self) -> u64 {
        self.c
    }
}

/// One analyzed line, with its pencil basis in canonical (echelon) form so
/// the verdict can be re-checked independently.
#[derive(Clone, Debug, Serialize)]
pub struct LineVerdict {
    pub h1: [u64; 4],
    pub h2: [u64; 4],
    pub level: usize,
    pub degree: usize,
    pub stab_order: usize,
    pub group_type: GroupType,
    pub is_galois: bool,
    pub classification: Classification,
}

fn packed4(h: &Hyperplane) -> [u64; 4] {
    std::array::from_fn(|i| h.coeffs()[i].packed())
}

fn line_label(line: &Line3) -> String {
    let (h1, h2) = line.pencil_basis();
    format!("{:?} and {:?}", packed4(&h1), packed4(&h2))
}

pub fn verdict_of(params: &CurveParams, line: &Line3) -> Result<LineVerdict, DriverError> {
    let an = analyze(params, line)?;
    let (h1, h2) = line.pencil_basis();
    Ok(LineVerdict {
        h1: packed4(&h1),
        h2: packed4(&h2),
        level: params.tower().level_of(line.ctx()).unwrap_or(0),
        degree: an.degree,
        stab_order: an.stabilizer.order(),
        group_type: an.group_type,
        is_galois: an.is_galois,
        classification: an.classification,
    })
}

/// Tallies for the census of the plane at infinity, keyed by the Galois
/// group of the projection.
#[derive(Clone, Debug, Serialize)]
pub struct GroupCounts {
    #[serde(rename = "additive-semidirect-c2")]
    pub additive_semidirect_c2: usize,
    #[serde(rename = "multiplicative-semidirect-c2")]
    pub multiplicative_semidirect_c2: usize,
    #[serde(rename = "additive")]
    pub additive: usize,
}

impl GroupCounts {
    pub fn total(&self) -> usize {
        self.additive_semidirect_c2 + self.multiplicative_semidirect_c2 + self.additive
    }

    pub fn as_tuple(&self) -> (usize, usize, usize) {
        (
            self.additive_semidirect_c2,
            self.multiplicative_semidirect_c2,
            self.additive,
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusSection {
    pub rows: Vec<LineVerdict>,
    pub counts: GroupCounts,
}

/// Analyze every line of the plane at infinity over the base field.  The
/// expected split is q-1 lines through the quadric's center, q^2 lines
/// avoiding it, and the 2 rulings; any deviation, or any non-Galois line,
/// is a hard failure.
pub fn classify_plane_lines(ws: &Workspace) -> Result<CensusSection, DriverError> {
    let params = ws.params();
    let lines = enumerate_plane_lines(params.base_ctx());
    let mut rows = lines
        .par_iter()
        .map(|line| verdict_of(params, line))
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by_key(|r| (r.h1, r.h2));

    let mut counts = GroupCounts {
        additive_semidirect_c2: 0,
        multiplicative_semidirect_c2: 0,
        additive: 0,
    };
    for row in &rows {
        if !row.is_galois {
            continue;
        }
        match row.group_type {
            GroupType::FqSemiC2 => counts.additive_semidirect_c2 += 1,
            GroupType::FqStarSemiC2 => counts.multiplicative_semidirect_c2 += 1,
            GroupType::AdditiveFq => counts.additive += 1,
            _ => {}
        }
    }
    let q = ws.q() as usize;
    let expected = (q - 1, q * q, 2);
    if counts.as_tuple() != expected || counts.total() != rows.len() {
        return Err(DriverError::CountMismatch {
            q: ws.q(),
            c: ws.c(),
            expected,
            got: counts.as_tuple(),
        });
    }
    Ok(CensusSection { rows, counts })
}

/// The two ruling families through a parameter a: x = a is cut out by
/// {X - aZ = W - aY = 0}, y = a by {Y - aZ = W - aX = 0}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RulingFamily {
    #[serde(rename = "x-equals-a")]
    XEqualsA,
    #[serde(rename = "y-equals-a")]
    YEqualsA,
}

pub fn ruling_line(a: &FieldElement, family: RulingFamily) -> Result<Line3, DriverError> {
    let ctx = a.ctx();
    let (h1, h2) = match family {
        RulingFamily::XEqualsA => (
            Hyperplane::new([ctx.one(), ctx.zero(), -a, ctx.zero()])?,
            Hyperplane::new([ctx.zero(), -a, ctx.zero(), ctx.one()])?,
        ),
        RulingFamily::YEqualsA => (
            Hyperplane::new([ctx.zero(), ctx.one(), -a, ctx.zero()])?,
            Hyperplane::new([-a, ctx.zero(), ctx.zero(), ctx.one()])?,
        ),
    };
    Ok(Line3::from_hyperplanes(&h1, &h2)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct RulingVerdict {
    pub a: u64,
    pub level: usize,
    pub family: RulingFamily,
    pub verdict: LineVerdict,
    /// stabilizer equals the one of the matching line at infinity
    pub stabilizer_matches_reference: bool,
    /// for a in the base field: multiplicity of the single tangent point
    pub tangent_multiplicity: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RulingSection {
    pub rows: Vec<RulingVerdict>,
    pub all_expected: bool,
}

/// Sample parameters for the ruling scan: the whole base field plus a
/// seeded draw from the quadratic and cubic levels.
pub fn default_ruling_samples(ws: &Workspace, seed: u64, per_level: usize) -> Vec<FieldElement> {
    let params = ws.params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<FieldElement> = params.base_ctx().iter_elements().collect();
    for k in [2usize, 3] {
        let ctx = params.ctx(k).unwrap().clone();
        // the quadratic level of a small field may not hold per_level
        // elements outside the base; take what exists
        let available = (ctx.cardinality() - params.base_ctx().cardinality()) as usize;
        let want = per_level.min(available);
        let mut chosen = HashSet::new();
        let mut found = 0;
        while found < want {
            let packed = rng.gen_range(0..ctx.cardinality());
            let a = ctx.from_packed(packed);
            if params.tower().lower(&a, 1).is_some() || !chosen.insert(packed) {
                continue;
            }
            out.push(a);
            found += 1;
        }
    }
    out
}

/// Both ruling lines through every sampled parameter: each must be Galois
/// of degree q with the additive group, its stabilizer literally equal to
/// the stabilizer of the matching line at infinity, and tangent exactly
/// when a lies in the base field.
pub fn scan_rulings(ws: &Workspace, samples: &[FieldElement]) -> Result<RulingSection, DriverError> {
    let params = ws.params();
    let base = params.base_ctx().clone();
    let q = ws.q();

    // reference stabilizers of the two lines at infinity
    let line_x_infty = Line3::from_hyperplanes(
        &Hyperplane::new([base.zero(), base.one(), base.zero(), base.zero()])?,
        &Hyperplane::new([base.zero(), base.zero(), base.one(), base.zero()])?,
    )?;
    let line_y_infty = Line3::from_hyperplanes(
        &Hyperplane::new([base.one(), base.zero(), base.zero(), base.zero()])?,
        &Hyperplane::new([base.zero(), base.zero(), base.one(), base.zero()])?,
    )?;
    let stab_x_infty = stabilizer(params, &line_x_infty)?;
    let stab_y_infty = stabilizer(params, &line_y_infty)?;

    let work: Vec<(FieldElement, RulingFamily)> = samples
        .iter()
        .flat_map(|a| {
            [
                (a.clone(), RulingFamily::XEqualsA),
                (a.clone(), RulingFamily::YEqualsA),
            ]
        })
        .collect();

    let mut rows = work
        .par_iter()
        .map(|(a, family)| -> Result<RulingVerdict, DriverError> {
            let line = ruling_line(a, *family)?;
            let an = analyze(params, &line)?;
            // projection from an x = a ruling is the fibration in y, the
            // same one the line {Y = Z = 0} induces; and symmetrically
            let reference = match family {
                RulingFamily::XEqualsA => &stab_x_infty,
                RulingFamily::YEqualsA => &stab_y_infty,
            };
            let matches = an.stabilizer.order() == reference.order()
                && an.stabilizer.elements().iter().all(|g| reference.contains(g));
            let in_base = params.tower().lower(a, 1).is_some();
            let tangent_multiplicity = if in_base {
                let ints = params.line_intersections(&line)?;
                (ints.points.len() == 1 && ints.missing_multiplicity == 0)
                    .then(|| ints.points[0].1)
            } else {
                None
            };
            let (h1, h2) = line.pencil_basis();
            Ok(RulingVerdict {
                a: a.packed(),
                level: params.tower().level_of(a.ctx()).unwrap_or(0),
                family: *family,
                verdict: LineVerdict {
                    h1: packed4(&h1),
                    h2: packed4(&h2),
                    level: params.tower().level_of(line.ctx()).unwrap_or(0),
                    degree: an.degree,
                    stab_order: an.stabilizer.order(),
                    group_type: an.group_type,
                    is_galois: an.is_galois,
                    classification: an.classification,
                },
                stabilizer_matches_reference: matches,
                tangent_multiplicity,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by_key(|r| (r.level, r.a, r.family == RulingFamily::YEqualsA));

    let all_expected = rows.iter().all(|r| {
        r.verdict.is_galois
            && r.verdict.degree as u64 == q
            && r.verdict.group_type == GroupType::AdditiveFq
            && r.stabilizer_matches_reference
            && (r.level != 1 || r.tangent_multiplicity == Some(q as usize))
    });
    Ok(RulingSection { rows, all_expected })
}

/// How a negative-control line was generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NegativeStrategy {
    /// through two affine curve points
    #[serde(rename = "secant")]
    Secant,
    /// through one curve point and one random point
    #[serde(rename = "through-point")]
    ThroughPoint,
    /// misses the curve entirely, not inside the plane at infinity
    #[serde(rename = "disjoint")]
    Disjoint,
    /// inside the plane at infinity but not definable over the base field
    #[serde(rename = "extension-plane")]
    ExtensionPlane,
}

const STRATEGIES: [NegativeStrategy; 4] = [
    NegativeStrategy::Secant,
    NegativeStrategy::ThroughPoint,
    NegativeStrategy::Disjoint,
    NegativeStrategy::ExtensionPlane,
];

#[derive(Clone, Debug, Serialize)]
pub struct NegativeRow {
    pub strategy: NegativeStrategy,
    pub verdict: LineVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct NegativeSection {
    pub seed: u64,
    pub requested: usize,
    pub rows: Vec<NegativeRow>,
}

fn affine_pool(params: &CurveParams, k: usize, cap: usize) -> Vec<CurvePoint> {
    let ctx = params.ctx(k).unwrap().clone();
    let mut out = Vec::new();
    for packed in 0..ctx.cardinality() {
        let a = ctx.from_packed(packed);
        out.extend(
            params
                .solve_affine(&AffineConstraint::XEquals(a))
                .unwrap_or_default(),
        );
        if out.len() >= cap {
            break;
        }
    }
    out
}

fn random_point(ctx: &Arc<FieldCtx>, rng: &mut ChaCha8Rng) -> ProjPoint3 {
    loop {
        let coords: [FieldElement; 4] =
            std::array::from_fn(|_| ctx.from_packed(rng.gen_range(0..ctx.cardinality())));
        if coords.iter().any(|c| !c.is_zero()) {
            return ProjPoint3::new(coords).unwrap();
        }
    }
}

/// Is this line one of the known Galois families: on the quadric, or a
/// base-field line inside the plane at infinity?
fn in_known_families(params: &CurveParams, line: &Line3, z_plane: &Hyperplane) -> bool {
    if params.line_in_quadric(line) {
        return true;
    }
    if let Some(base_line) = line.lower(params.tower(), 1) {
        if base_line.in_hyperplane(z_plane) {
            return true;
        }
    }
    false
}

/// Seeded generation of lines outside the known families, in four
/// strategies, all of which must test non-Galois.  A Galois verdict on any
/// of them is a hard failure.
pub fn negative_scan(ws: &Workspace, n: usize, seed: u64) -> Result<NegativeSection, DriverError> {
    let params = ws.params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = params.base_ctx().clone();
    let z_plane = Hyperplane::new([base.zero(), base.zero(), base.one(), base.zero()])?;

    let mut pool = affine_pool(params, 1, 40);
    pool.extend(affine_pool(params, 2, 40));
    let poles = params.infinite_points();

    let mut candidates: Vec<(NegativeStrategy, Line3)> = Vec::with_capacity(n);
    let mut strategy_idx = 0;
    let mut guard = 0;
    while candidates.len() < n {
        guard += 1;
        assert!(guard < 200 * n, "negative line generation stalled");
        let strategy = STRATEGIES[strategy_idx % STRATEGIES.len()];
        strategy_idx += 1;
        let line = match strategy {
            NegativeStrategy::Secant => {
                if pool.len() < 2 {
                    continue;
                }
                let pa = &pool[rng.gen_range(0..pool.len())];
                let pb = &pool[rng.gen_range(0..pool.len())];
                if params.points_equal(pa, pb) {
                    continue;
                }
                let k = params.point_level(pa).max(params.point_level(pb));
                let va = params.embed(pa).lift(params.tower(), k);
                let vb = params.embed(pb).lift(params.tower(), k);
                match Line3::through(&va, &vb) {
                    Ok(line) => line,
                    Err(_) => continue,
                }
            }
            NegativeStrategy::ThroughPoint => {
                let on_curve = if rng.gen_bool(0.5) && !pool.is_empty() {
                    pool[rng.gen_range(0..pool.len())].clone()
                } else {
                    poles[rng.gen_range(0..poles.len())].clone()
                };
                let k = params.point_level(&on_curve).max(2);
                let ctx = params.ctx(k)?.clone();
                let va = params.embed(&on_curve).lift(params.tower(), k);
                let vb = random_point(&ctx, &mut rng);
                match Line3::through(&va, &vb) {
                    Ok(line) => line,
                    Err(_) => continue,
                }
            }
            NegativeStrategy::Disjoint => {
                let k = 1 + (rng.gen_range(0..2usize));
                let ctx = params.ctx(k)?.clone();
                let va = random_point(&ctx, &mut rng);
                let vb = random_point(&ctx, &mut rng);
                let line = match Line3::through(&va, &vb) {
                    Ok(line) => line,
                    Err(_) => continue,
                };
                let zk = z_plane.lift(params.tower(), k);
                if line.in_hyperplane(&zk) {
                    continue;
                }
                if params.line_intersections(&line)?.total() != 0 {
                    continue;
                }
                line
            }
            NegativeStrategy::ExtensionPlane => {
                let ctx = params.ctx(2)?.clone();
                let coeffs = [
                    ctx.from_packed(rng.gen_range(0..ctx.cardinality())),
                    ctx.from_packed(rng.gen_range(0..ctx.cardinality())),
                    ctx.zero(),
                    ctx.from_packed(rng.gen_range(0..ctx.cardinality())),
                ];
                if coeffs.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let h = Hyperplane::new(coeffs)?;
                let zk = z_plane.lift(params.tower(), 2);
                if h.coeffs() == zk.coeffs() {
                    continue;
                }
                Line3::from_hyperplanes(&zk, &h)?
            }
        };
        if in_known_families(params, &line, &z_plane) {
            continue;
        }
        candidates.push((strategy, line));
    }

    let rows = candidates
        .par_iter()
        .map(|(strategy, line)| {
            verdict_of(params, line).map(|verdict| NegativeRow {
                strategy: *strategy,
                verdict,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    for (row, (_, line)) in rows.iter().zip(&candidates) {
        if row.verdict.is_galois {
            return Err(DriverError::FalsePositive {
                q: ws.q(),
                line: line_label(line),
            });
        }
    }
    let mut rows = rows;
    rows.sort_by_key(|r| (r.verdict.level, r.verdict.h1, r.verdict.h2));
    Ok(NegativeSection {
        seed,
        requested: n,
        rows,
    })
}

/// Shape of the section of the hyperplane {Y - aZ = 0}, away from the
/// poles of x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SectionShape {
    /// a in the base field: the hyperplane contains the tangent line and
    /// the whole non-pole intersection is the single tangency point
    #[serde(rename = "tangent")]
    Tangent,
    /// q distinct points, all found on the predicted line
    #[serde(rename = "collinear-points")]
    CollinearPoints,
    /// the fiber is irrational over every tower level; the full
    /// multiplicity q still sits on the predicted line
    #[serde(rename = "collinear-unsplit")]
    CollinearUnsplit,
}

#[derive(Clone, Debug, Serialize)]
pub struct CollinearityRow {
    pub a: u64,
    pub level: usize,
    pub shape: SectionShape,
    pub points_found: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CollinearitySection {
    pub rows: Vec<CollinearityRow>,
    pub all_ok: bool,
}

/// Sample parameters for the collinearity check, mirroring the ruling scan.
pub fn default_collinearity_samples(
    ws: &Workspace,
    seed: u64,
    per_level: usize,
) -> Vec<FieldElement> {
    default_ruling_samples(ws, seed, per_level)
}

/// For each a, slice the curve with H = {Y - aZ = 0}.  Away from the q
/// poles of x (which always lie on H), the remaining degree q sits on the
/// single line {W - aX = Y - aZ = 0}: as a tangency for a in the base
/// field, as q distinct collinear points otherwise.  Both code paths are
/// cross-checked: the hyperplane-section solver must land every point on
/// the line the intersection machinery predicts.
pub fn collinear_section_check(
    ws: &Workspace,
    samples: &[FieldElement],
) -> Result<CollinearitySection, DriverError> {
    let params = ws.params();
    let q = ws.q() as usize;
    let mut rows = samples
        .par_iter()
        .map(|a| -> Result<CollinearityRow, DriverError> {
            let tower = params.tower();
            let j = tower.level_of(a.ctx()).unwrap_or(1);
            let ctx = a.ctx();
            let h = Hyperplane::new([ctx.zero(), ctx.one(), -a, ctx.zero()])?;
            let line = ruling_line(a, RulingFamily::YEqualsA)?;
            let mut ok = line.in_hyperplane(&h);

            if tower.lower(a, 1).is_some() {
                let ints = params.line_intersections(&line)?;
                let tangent = matches!(
                    ints.points.as_slice(),
                    [(CurvePoint::XPole { .. }, m)] if *m == q
                ) && ints.missing_multiplicity == 0;
                ok = ok && tangent;
                return Ok(CollinearityRow {
                    a: a.packed(),
                    level: j,
                    shape: SectionShape::Tangent,
                    points_found: usize::from(tangent),
                    ok,
                });
            }

            // collect the non-pole section points over every admissible level
            let mut found: Vec<CurvePoint> = Vec::new();
            let mut seen = HashSet::new();
            let mut k = j;
            while k <= 6 {
                let hk = h.lift(tower, k);
                for pt in params.hyperplane_section(&hk)? {
                    if matches!(pt, CurvePoint::XPole { .. }) {
                        continue;
                    }
                    if seen.insert(params.point_key(&pt)) {
                        found.push(pt);
                    }
                }
                k += j;
            }
            for pt in &found {
                let kp = params.point_level(pt);
                let v = params.embed(pt);
                ok = ok && line.lift(tower, kp).contains_point(&v);
            }
            let ints = params.line_intersections(&line)?;
            let shape = if found.len() == q {
                ok = ok && ints.missing_multiplicity == 0 && ints.points.len() == q;
                SectionShape::CollinearPoints
            } else {
                // nothing rational: the line must carry the multiplicity
                ok = ok && found.is_empty() && ints.missing_multiplicity == q;
                SectionShape::CollinearUnsplit
            };
            Ok(CollinearityRow {
                a: a.packed(),
                level: j,
                shape,
                points_found: found.len(),
                ok,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by_key(|r| (r.level, r.a));
    let all_ok = rows.iter().all(|r| r.ok);
    Ok(CollinearitySection { rows, all_ok })
}

/// Spot checks of the library's structural guarantees, summarized for a
/// report: automorphism group size and faithfulness, vanishing-order gaps
/// at infinity, agreement of the two projection-commutation oracles, and
/// fiber structure over a few Galois lines.
#[derive(Clone, Debug, Serialize)]
pub struct PropertySuite {
    pub aut_order: usize,
    pub aut_order_expected: bool,
    pub aut_faithful_on_infinity: bool,
    pub gap_orders_checked: usize,
    pub gap_orders_ok: bool,
    pub oracle_pairs_checked: usize,
    pub oracle_pairs_agree: bool,
    pub fibers_checked: usize,
    pub fibers_ok: bool,
}

pub fn property_suite(ws: &Workspace, seed: u64) -> Result<PropertySuite, DriverError> {
    let params = ws.params();
    let q = ws.q();
    let base = params.base_ctx().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let group = full_group(&base);
    let aut_order = group.order();
    let aut_order_expected = aut_order as u64 == 2 * q * q * (q - 1);
    let poles = params.infinite_points();
    let mut signatures = HashSet::new();
    for g in group.elements() {
        let sig: Vec<[u64; 4]> = poles
            .iter()
            .map(|pt| params.point_key(&g.act(params, pt)))
            .collect();
        signatures.insert(sig);
    }
    let aut_faithful_on_infinity = signatures.len() == aut_order;

    // vanishing orders of seeded hyperplanes through points at infinity
    let mut gap_orders_checked = 0;
    let mut gap_orders_ok = true;
    for _ in 0..60 {
        let k = 1 + rng.gen_range(0..2usize);
        let ctx = params.ctx(k)?.clone();
        let pt = &poles[rng.gen_range(0..poles.len())];
        let v = params.embed(pt).lift(params.tower(), k);
        let mut coeffs: [FieldElement; 4] =
            std::array::from_fn(|_| ctx.from_packed(rng.gen_range(0..ctx.cardinality())));
        let free = if v.coords()[0].is_zero() { 1 } else { 0 };
        let mut dot = ctx.zero();
        for (i, c) in coeffs.iter().enumerate() {
            if i != free {
                dot = &dot + &(c * &v.coords()[i]);
            }
        }
        coeffs[free] = -&(&dot * &v.coords()[free].inv().map_err(CurveError::from)?);
        if coeffs.iter().all(|c| c.is_zero()) {
            continue;
        }
        let h = Hyperplane::new(coeffs)?;
        let ord = params.ord_hyperplane(pt, &h)?;
        gap_orders_checked += 1;
        gap_orders_ok &= ord == 1 || ord as u64 == q || ord as u64 == q + 1;
    }

    // the quadric commutation test against pointwise evaluation over the
    // cubic level, on seeded (automorphism, line) pairs
    let mut oracle_samples: Vec<CurvePoint> = poles.clone();
    for k in [1usize, 2, 3] {
        oracle_samples.extend(affine_pool(params, k, 6));
    }
    let mut oracle_pairs_checked = 0;
    let mut oracle_pairs_agree = true;
    for _ in 0..120 {
        let g = &group.elements()[rng.gen_range(0..group.order())];
        let k = 1 + rng.gen_range(0..2usize);
        let ctx = params.ctx(k)?.clone();
        let va = random_point(&ctx, &mut rng);
        let vb = random_point(&ctx, &mut rng);
        let Ok(line) = Line3::through(&va, &vb) else {
            continue;
        };
        let fast = commutes_with_projection(params, g, &line)?;
        let slow = commutes_pointwise(params, g, &line, &oracle_samples)?;
        oracle_pairs_checked += 1;
        oracle_pairs_agree &= fast == slow;
    }

    // fibers over a few pencil members of three known Galois lines
    let gen = base.generator();
    let fiber_lines = [
        Line3::from_hyperplanes(
            &Hyperplane::new([base.zero(), base.one(), base.zero(), base.zero()])?,
            &Hyperplane::new([base.zero(), base.zero(), base.one(), base.zero()])?,
        )?,
        Line3::from_hyperplanes(
            &Hyperplane::new([base.one(), -&gen, base.zero(), base.zero()])?,
            &Hyperplane::new([base.zero(), base.zero(), base.one(), base.zero()])?,
        )?,
        Line3::from_hyperplanes(
            &Hyperplane::new([base.zero(), base.zero(), base.one(), base.zero()])?,
            &Hyperplane::new([base.one(), gen.clone(), base.zero(), base.one()])?,
        )?,
    ];
    let mut fibers_checked = 0;
    let mut fibers_ok = true;
    for line in &fiber_lines {
        let an = analyze(params, line)?;
        fibers_ok &= an.is_galois;
        let mut complete_here = 0;
        'members: for lm in [(1u64, 0u64), (0, 1), (1, 1), (1, 2)] {
            let lambda = base.from_packed(lm.0 % base.cardinality());
            let mu = base.from_packed(lm.1 % base.cardinality());
            if lambda.is_zero() && mu.is_zero() {
                continue;
            }
            for k in [1usize, 2, 3, 4, 6] {
                let fb = fiber(params, line, &lambda, &mu, k)?;
                if !fb.complete {
                    continue;
                }
                let Some(e) = uniform_ramification(&fb) else {
                    fibers_ok = false;
                    continue 'members;
                };
                fibers_ok &= e * fb.points.len() == an.degree;
                let first = &fb.points[0].point;
                let orbit = an.stabilizer.orbit(params, first);
                fibers_ok &= orbit.len() == fb.points.len();
                fibers_ok &=
                    an.stabilizer.point_stabilizer(params, first).order() == e;
                fibers_checked += 1;
                complete_here += 1;
                break;
            }
        }
        fibers_ok &= complete_here > 0;
    }

    Ok(PropertySuite {
        aut_order,
        aut_order_expected,
        aut_faithful_on_infinity,
        gap_orders_checked,
        gap_orders_ok,
        oracle_pairs_checked,
        oracle_pairs_agree,
        fibers_checked,
        fibers_ok,
    })
}

/// Reproducibility block: everything needed to re-run the report.
#[derive(Clone, Debug, Serialize)]
pub struct ParamsSection {
    pub p: u64,
    pub e: usize,
    pub q: u64,
    pub c: u64,
    pub seed: u64,
    pub tool_version: String,
    /// packed modulus coefficients per tower level
    pub moduli: Vec<ModulusEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusEntry {
    pub level: usize,
    pub modulus: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TimingSection {
    pub total_ms: u128,
    pub census_ms: u128,
    pub rulings_ms: u128,
    pub negatives_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub params: ParamsSection,
    pub census: CensusSection,
    pub rulings: RulingSection,
    pub negatives: NegativeSection,
    pub collinearity: CollinearitySection,
    pub properties: PropertySuite,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingSection>,
}

pub fn params_section(ws: &Workspace, seed: u64) -> ParamsSection {
    let params = ws.params();
    let tower = params.tower();
    let moduli = tower
        .level_ids()
        .map(|k| ModulusEntry {
            level: k,
            modulus: tower.level(k).unwrap().modulus().to_vec(),
        })
        .collect();
    ParamsSection {
        p: params.p(),
        e: tower.e_base(),
        q: ws.q(),
        c: ws.c(),
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        moduli,
    }
}

/// Run every section and assemble the full report.  Timing is optional so
/// that serialized reports can stay byte-stable across runs.
pub fn full_report(
    q: u64,
    c: u64,
    seed: u64,
    n_negatives: usize,
    with_timing: bool,
) -> Result<Report, DriverError> {
    let ws = Workspace::new(q, c)?;
    let t0 = std::time::Instant::now();
    let census = classify_plane_lines(&ws)?;
    let t1 = std::time::Instant::now();
    let rulings = scan_rulings(&ws, &default_ruling_samples(&ws, seed, 12))?;
    let t2 = std::time::Instant::now();
    let negatives = negative_scan(&ws, n_negatives, seed)?;
    let t3 = std::time::Instant::now();
    let collinearity =
        collinear_section_check(&ws, &default_collinearity_samples(&ws, seed ^ 1, 24))?;
    let properties = property_suite(&ws, seed ^ 2)?;
    let timing = with_timing.then(|| TimingSection {
        total_ms: t0.elapsed().as_millis(),
        census_ms: (t1 - t0).as_millis(),
        rulings_ms: (t2 - t1).as_millis(),
        negatives_ms: (t3 - t2).as_millis(),
    });
    Ok(Report {
        schema: 1,
        params: params_section(&ws, seed),
        census,
        rulings,
        negatives,
        collinearity,
        properties,
        timing,
    })
}
