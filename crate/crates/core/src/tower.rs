//! A tower of extensions F_{q^k} of the base field F_q = F_{p^e}, with
//! pairwise-compatible embeddings.
//!
//! Level k is F_{p^{e k}} in its own canonical representation.  For j | k the
//! embedding j -> k sends the level-j generator to a root of the level-j
//! modulus inside level k; roots are chosen so that every triangle through
//! level 1 commutes (the candidate root must restrict to the already-chosen
//! image of the base-field generator), and ties are broken by smallest packed
//! value.  Two towers built with the same parameters therefore agree on every
//! element and every embedding.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::field::{FieldCtx, FieldElement, FieldError};
use crate::linalg;
use crate::poly::Poly;

/// One field embedding, stored as the powers of the chosen root so that
/// applying it is a dot product with the source coordinates.
#[derive(Clone)]
pub struct Embedding {
    from: Arc<FieldCtx>,
    to: Arc<FieldCtx>,
    powers: Vec<FieldElement>,
}

impl Embedding {
    fn from_root(from: &Arc<FieldCtx>, to: &Arc<FieldCtx>, root: &FieldElement) -> Embedding {
        let deg = from.e();
        let mut powers = Vec::with_capacity(deg);
        let mut acc = to.one();
        for _ in 0..deg {
            powers.push(acc.clone());
            acc = &acc * root;
        }
        Embedding {
            from: from.clone(),
            to: to.clone(),
            powers,
        }
    }

    pub fn apply(&self, x: &FieldElement) -> FieldElement {
        assert!(x.ctx().same(&self.from), "element not from the source field");
        let mut acc = self.to.zero();
        for (&c, pw) in x.coords().iter().zip(&self.powers) {
            if c != 0 {
                acc = &acc + &pw.scale_by(c);
            }
        }
        acc
    }
}

/// The extension tower.  Immutable once built; meant to be shared.
pub struct Tower {
    p: u64,
    e_base: usize,
    levels: BTreeMap<usize, Arc<FieldCtx>>,
    embeddings: BTreeMap<(usize, usize), Embedding>,
}

impl std::fmt::Debug for Tower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ks: Vec<usize> = self.levels.keys().copied().collect();
        write!(f, "Tower(q = {}^{}, levels {:?})", self.p, self.e_base, ks)
    }
}

impl Tower {
    /// Build levels `ks` (must contain 1) of the tower over F_{p^e_base}.
    pub fn new(
        p: u64,
        e_base: usize,
        ks: &[usize],
        bound: u64,
    ) -> Result<Tower, FieldError> {
        assert!(ks.contains(&1), "the tower must contain its base level");
        let mut levels = BTreeMap::new();
        for &k in ks {
            assert!(k >= 1);
            levels.insert(k, FieldCtx::build_with_bound(p, e_base * k, bound)?);
        }
        let mut embeddings = BTreeMap::new();
        let base = levels[&1].clone();
        let g1 = base.generator();
        // pass 1: level 1 into everything above
        for (&k, ctx_k) in levels.iter().filter(|(&k, _)| k > 1) {
            let m1 = lift_fp_poly(base.modulus(), ctx_k);
            let roots = m1.roots().expect("modulus is nonzero");
            let root = &roots.first().expect("modulus splits in any multiple level").0;
            embeddings.insert((1, k), Embedding::from_root(&base, ctx_k, root));
        }
        // pass 2: higher edges, constrained to restrict correctly on level 1
        let pairs: Vec<(usize, usize)> = levels
            .keys()
            .flat_map(|&j| levels.keys().map(move |&k| (j, k)))
            .filter(|&(j, k)| j > 1 && j < k && k % j == 0)
            .collect();
        for (j, k) in pairs {
            let ctx_j = &levels[&j];
            let ctx_k = &levels[&k];
            let g1_in_j = embeddings[&(1, j)].apply(&g1);
            let g1_in_k = embeddings[&(1, k)].apply(&g1);
            let mj = lift_fp_poly(ctx_j.modulus(), ctx_k);
            let mut chosen = None;
            for (root, _) in mj.roots().expect("modulus is nonzero") {
                let cand = Embedding::from_root(ctx_j, ctx_k, &root);
                if cand.apply(&g1_in_j) == g1_in_k {
                    chosen = Some(cand);
                    break; // roots come back sorted, so this is the smallest
                }
            }
            let emb = chosen.expect("a compatible root always exists");
            embeddings.insert((j, k), emb);
        }
        Ok(Tower {
            p,
            e_base,
            levels,
            embeddings,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e_base(&self) -> usize {
        self.e_base
    }

    /// Base-field cardinality q.
    pub fn q(&self) -> u64 {
        self.levels[&1].cardinality()
    }

    pub fn level(&self, k: usize) -> Result<&Arc<FieldCtx>, FieldError> {
        self.levels.get(&k).ok_or(FieldError::LevelMissing(k))
    }

    pub fn level_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.levels.keys().copied()
    }

    /// Which level a context belongs to, if any.
    pub fn level_of(&self, ctx: &FieldCtx) -> Option<usize> {
        if ctx.e() % self.e_base != 0 {
            return None;
        }
        let k = ctx.e() / self.e_base;
        self.levels.get(&k).filter(|c| c.same(ctx)).map(|_| k)
    }

    /// Embed x into level `to_k`; identity when already there.
    pub fn lift(&self, x: &FieldElement, to_k: usize) -> Result<FieldElement, FieldError> {
        let j = self
            .level_of(x.ctx())
            .ok_or(FieldError::ContextMismatch)?;
        if j == to_k {
            return Ok(x.clone());
        }
        if to_k % j != 0 || !self.levels.contains_key(&to_k) {
            return Err(FieldError::LevelMissing(to_k));
        }
        Ok(self.embeddings[&(j, to_k)].apply(x))
    }

    /// Coordinates of x at the lower level `to_j`, if x lies in its image.
    pub fn lower(&self, x: &FieldElement, to_j: usize) -> Option<FieldElement> {
        let k = self.level_of(x.ctx())?;
        if to_j == k {
            return Some(x.clone());
        }
        if k % to_j != 0 || !self.levels.contains_key(&to_j) {
            return None;
        }
        let emb = &self.embeddings[&(to_j, k)];
        let fp = prime_ctx(x.ctx());
        let rows = x.ctx().e();
        let cols = emb.from.e();
        let mut m = vec![vec![fp.zero(); cols]; rows];
        for (c, pw) in emb.powers.iter().enumerate() {
            for (r, &coord) in pw.coords().iter().enumerate() {
                m[r][c] = fp.from_packed(coord);
            }
        }
        let b: Vec<FieldElement> = x.coords().iter().map(|&v| fp.from_packed(v)).collect();
        let sol = linalg::solve(&fp, &m, &b)?;
        let coords: Vec<u64> = sol.iter().map(|c| c.packed()).collect();
        let y = self.levels[&to_j].elem(&coords);
        debug_assert_eq!(&emb.apply(&y), x);
        Some(y)
    }

    /// Smallest tower level whose image contains x, with the lowered element.
    pub fn min_level(&self, x: &FieldElement) -> (usize, FieldElement) {
        let k = self
            .level_of(x.ctx())
            .expect("element does not belong to the tower");
        for &j in self.levels.keys() {
            if k % j == 0 && j < k {
                if let Some(y) = self.lower(x, j) {
                    return (j, y);
                }
            }
        }
        (k, x.clone())
    }
}

/// Read an F_p coefficient vector as a polynomial over a bigger field.
fn lift_fp_poly(coeffs: &[u64], ctx: &Arc<FieldCtx>) -> Poly {
    Poly::new(ctx, coeffs.iter().map(|&c| ctx.from_packed(c)).collect())
}

/// F_p as its own context (cached per call site is unnecessary: build is cheap
/// for e = 1).
fn prime_ctx(ctx: &Arc<FieldCtx>) -> Arc<FieldCtx> {
    FieldCtx::build(ctx.p(), 1).expect("characteristic is prime")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DEFAULT_CARDINALITY_BOUND;

    fn tower(p: u64, e: usize, ks: &[usize]) -> Tower {
        Tower::new(p, e, ks, DEFAULT_CARDINALITY_BOUND).unwrap()
    }

    #[test]
    fn embeddings_are_ring_maps() {
        let t = tower(3, 1, &[1, 2, 3, 6]);
        let f3 = t.level(1).unwrap().clone();
        for a in f3.iter_elements() {
            for b in f3.iter_elements() {
                let la = t.lift(&a, 6).unwrap();
                let lb = t.lift(&b, 6).unwrap();
                assert_eq!(t.lift(&(&a + &b), 6).unwrap(), &la + &lb);
                assert_eq!(t.lift(&(&a * &b), 6).unwrap(), &la * &lb);
            }
        }
        // higher edge too
        let f9 = t.level(2).unwrap().clone();
        let x = f9.generator();
        let y = f9.from_packed(5);
        assert_eq!(
            t.lift(&(&x * &y), 6).unwrap(),
            &t.lift(&x, 6).unwrap() * &t.lift(&y, 6).unwrap()
        );
    }

    #[test]
    fn triangles_through_the_base_commute() {
        for (p, e, ks) in [(3u64, 1usize, vec![1, 2, 3, 4, 6]), (2, 2, vec![1, 2, 3, 6])] {
            let t = tower(p, e, &ks);
            let base = t.level(1).unwrap().clone();
            for x in base.iter_elements() {
                for (j, k) in [(2, 4), (2, 6), (3, 6)] {
                    if !ks.contains(&j) || !ks.contains(&k) {
                        continue;
                    }
                    let via = t.lift(&t.lift(&x, j).unwrap(), k).unwrap();
                    let direct = t.lift(&x, k).unwrap();
                    assert_eq!(via, direct, "x = {} via {} into {}", x, j, k);
                }
            }
        }
    }

    #[test]
    fn lift_lands_in_the_right_subfield() {
        let t = tower(3, 2, &[1, 2, 3]); // q = 9
        let f9 = t.level(1).unwrap().clone();
        for x in f9.iter_elements() {
            let up = t.lift(&x, 3).unwrap();
            assert!(up.in_subfield(9).unwrap());
            if x.packed() >= 3 {
                // not in F_3: exactly the non-constant part of F_9
                assert!(!up.in_subfield(3).unwrap());
            }
        }
    }

    #[test]
    fn lower_inverts_lift_and_rejects_outsiders() {
        let t = tower(5, 1, &[1, 2]);
        let f5 = t.level(1).unwrap().clone();
        let f25 = t.level(2).unwrap().clone();
        for x in f5.iter_elements() {
            let up = t.lift(&x, 2).unwrap();
            assert_eq!(t.lower(&up, 1), Some(x));
        }
        let mut outside = 0;
        for y in f25.iter_elements() {
            if t.lower(&y, 1).is_none() {
                outside += 1;
            }
        }
        assert_eq!(outside, 20); // 25 - 5
    }

    #[test]
    fn min_level_finds_the_smallest_home() {
        let t = tower(3, 1, &[1, 2, 3, 6]);
        let f729 = t.level(6).unwrap().clone();
        let from_f3 = t.lift(&t.level(1).unwrap().from_packed(2), 6).unwrap();
        assert_eq!(t.min_level(&from_f3).0, 1);
        let from_f9 = t
            .lift(&t.level(2).unwrap().generator(), 6)
            .unwrap();
        assert_eq!(t.min_level(&from_f9).0, 2);
        assert_eq!(t.min_level(&f729.generator()).0, 6);
    }

    #[test]
    fn missing_level_is_an_error() {
        let t = tower(3, 1, &[1, 2]);
        assert!(matches!(t.level(5), Err(FieldError::LevelMissing(5))));
        let x = t.level(1).unwrap().one();
        assert!(matches!(
            t.lift(&x, 6),
            Err(FieldError::LevelMissing(6))
        ));
        // lowering to an absent or non-dividing level is just None
        let y = t.level(2).unwrap().one();
        assert_eq!(t.lower(&y, 5), None);
    }
}
