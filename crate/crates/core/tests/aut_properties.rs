//! Group-theoretic properties of the curve's automorphisms at scale:
//! order and faithfulness for the larger fields, the homomorphism laws
//! for the action and the matrix representation, and the structure of
//! the translation subgroups.

use std::collections::HashSet;
use std::sync::OnceLock;

use asm_galois_core::aut::{full_group, group_type, AutElement, GroupType, Subgroup};
use asm_galois_core::curve::{AffineConstraint, CurveParams, CurvePoint};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn curve(p: u64, e: usize, c: u64) -> CurveParams {
    CurveParams::new(p, e, c).unwrap()
}

fn shared_curves() -> &'static Vec<CurveParams> {
    static CURVES: OnceLock<Vec<CurveParams>> = OnceLock::new();
    CURVES.get_or_init(|| vec![curve(3, 1, 1), curve(2, 2, 1), curve(5, 1, 1)])
}

/// A pool of sample points: every point at infinity plus a few affine
/// points over levels one to three.
fn sample_points(params: &CurveParams, rng: &mut ChaCha8Rng) -> Vec<CurvePoint> {
    let mut pts = params.infinite_points();
    for k in [1usize, 2, 3] {
        let ctx = params.ctx(k).unwrap().clone();
        let mut found = 0;
        let mut tries = 0;
        while found < 2 && tries < 12 {
            tries += 1;
            let a = ctx.from_packed(rng.gen_range(0..ctx.cardinality()));
            let fiber = params.solve_affine(&AffineConstraint::XEquals(a)).unwrap();
            if let Some(pt) = fiber.first() {
                pts.push(pt.clone());
                found += 1;
            }
        }
    }
    pts
}

/// |Aut| = 2 q^2 (q - 1) for the larger constants too, with closure
/// checked on construction and the action on the 2q points at infinity
/// already separating every pair of elements.
#[test]
fn group_order_and_faithfulness_for_larger_q() {
    for (p, e) in [(7u64, 1usize), (2, 3), (3, 2)] {
        let params = curve(p, e, 1);
        let q = params.q();
        let group = full_group(params.base_ctx());
        assert_eq!(group.order() as u64, 2 * q * q * (q - 1));

        let poles = params.infinite_points();
        let mut signatures = HashSet::new();
        for g in group.elements() {
            let sig: Vec<[u64; 4]> = poles
                .iter()
                .map(|pt| params.point_key(&g.act(&params, pt)))
                .collect();
            signatures.insert(sig);
        }
        assert_eq!(signatures.len(), group.order(), "q={}", q);
    }
}

/// The action on curve points is a left action: acting by a composite
/// equals acting twice, and inverses undo.
#[test]
fn action_is_a_homomorphism_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac710);
    for params in shared_curves() {
        let group = full_group(params.base_ctx());
        let pts = sample_points(params, &mut rng);
        for _ in 0..300 {
            let g = &group.elements()[rng.gen_range(0..group.order())];
            let h = &group.elements()[rng.gen_range(0..group.order())];
            let pt = &pts[rng.gen_range(0..pts.len())];
            let via_composite = g.compose(h).act(params, pt);
            let via_steps = g.act(params, &h.act(params, pt));
            assert!(params.points_equal(&via_composite, &via_steps));
            let back = g.inverse().act(params, &g.act(params, pt));
            assert!(params.points_equal(&back, pt));
        }
    }
}

/// The projective matrices realize the abstract action at every tower
/// level a point lives on.
#[test]
fn matrices_represent_the_action_at_every_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3a7341);
    for params in shared_curves() {
        let group = full_group(params.base_ctx());
        let pts = sample_points(params, &mut rng);
        for _ in 0..200 {
            let g = &group.elements()[rng.gen_range(0..group.order())];
            let pt = &pts[rng.gen_range(0..pts.len())];
            let k = params.point_level(pt);
            let moved = params.embed(&g.act(params, pt)).lift(params.tower(), k);
            let pushed = g.apply_matrix(params.tower(), &params.embed(pt));
            assert_eq!(moved.key(), pushed.lift(params.tower(), k).key());
        }
    }
}

/// Subgroups generated from random subsets obey Lagrange: the order
/// divides |Aut|, the exponent divides the order through each element,
/// and orbit sizes times point stabilizer orders give the order back.
#[test]
fn generated_subgroups_obey_lagrange_and_orbit_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a64a46e);
    for params in shared_curves() {
        let group = full_group(params.base_ctx());
        let pts = sample_points(params, &mut rng);
        for _ in 0..12 {
            let n_gens = rng.gen_range(1..=3);
            let gens: Vec<AutElement> = (0..n_gens)
                .map(|_| group.elements()[rng.gen_range(0..group.order())].clone())
                .collect();
            let sub = Subgroup::generate(&gens);
            assert_eq!(group.order() % sub.order(), 0);
            assert!(sub.is_subgroup_of(&group));
            for g in sub.elements() {
                assert_eq!(sub.exponent() % g.order(), 0);
            }
            let pt = &pts[rng.gen_range(0..pts.len())];
            let orbit = sub.orbit(params, pt);
            let stab = sub.point_stabilizer(params, pt);
            assert_eq!(orbit.len() * stab.order(), sub.order());
        }
    }
}

/// The translations form a normal subgroup of order q^2, elementary
/// abelian, and each one-parameter half is recognized as the additive
/// group of the field.
#[test]
fn translations_form_normal_elementary_abelian_subgroups() {
    for (p, e) in [(3u64, 1usize), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)] {
        let params = curve(p, e, 1);
        let ctx = params.base_ctx();
        let q = params.q();
        let mut gens = Vec::new();
        for a in ctx.iter_elements() {
            if a.is_zero() {
                continue;
            }
            gens.push(AutElement::new(ctx.one(), a.clone(), ctx.zero(), false).unwrap());
            gens.push(AutElement::new(ctx.one(), ctx.zero(), a.clone(), false).unwrap());
        }
        let translations = Subgroup::generate(&gens);
        assert_eq!(translations.order() as u64, q * q);
        assert!(translations.is_abelian());
        assert_eq!(translations.exponent() as u64, p);

        let x_half: Vec<AutElement> = translations
            .elements()
            .iter()
            .filter(|g| g.translation_y().is_zero())
            .cloned()
            .collect();
        let x_half = Subgroup::from_elements(x_half).unwrap();
        assert_eq!(x_half.order() as u64, q);
        assert_eq!(group_type(&x_half, q, p), GroupType::AdditiveFq);

        if q <= 5 {
            let group = full_group(ctx);
            assert!(translations.is_normal_in(&group));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(192))]

    /// Composition is associative and inversion is an anti-homomorphism,
    /// across all three shared curves.
    #[test]
    fn composition_laws_hold(
        curve_idx in 0usize..3,
        picks in prop::array::uniform3(0usize..10_000),
    ) {
        let params = &shared_curves()[curve_idx];
        let group = full_group(params.base_ctx());
        let n = group.order();
        let g = &group.elements()[picks[0] % n];
        let h = &group.elements()[picks[1] % n];
        let k = &group.elements()[picks[2] % n];
        let left = g.compose(h).compose(k);
        let right = g.compose(&h.compose(k));
        prop_assert_eq!(left.key(), right.key());
        let anti = g.compose(h).inverse();
        let swapped = h.inverse().compose(&g.inverse());
        prop_assert_eq!(anti.key(), swapped.key());
        prop_assert!(g.compose(&g.inverse()).is_identity());
    }
}
