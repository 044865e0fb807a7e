//! Univariate polynomials over a finite field, with exact root extraction.
//!
//! Root finding is deterministic.  Over fields up to [`EXHAUSTIVE_LIMIT`]
//! elements it simply evaluates everywhere; above that it reduces to the
//! squarefree product of linear factors via gcd with X^card - X and splits it
//! with the classical character (odd p) or trace (p = 2) maps, probing map
//! parameters from a fixed-seed stream so the recursion tree is a function
//! of the input alone.  A counter-order sweep backs the probing up: root
//! sets with subfield-coset structure can make almost all small parameters
//! degenerate, but some parameter always separates.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{FieldCtx, FieldElement, FieldError};

/// Probes drawn from the fixed-seed stream before falling back to the
/// exhaustive parameter sweep.
const SPLIT_PROBES: usize = 256;

/// Cardinality cutoff between exhaustive evaluation and gcd-based splitting.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 14;

/// Polynomial with coefficients low-degree first; the vector never has a
/// trailing zero, so the zero polynomial is the empty vector.
#[derive(Clone)]
pub struct Poly {
    ctx: Arc<FieldCtx>,
    coeffs: Vec<FieldElement>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same(&other.ctx) && self.coeffs == other.coeffs
    }
}

impl Eq for Poly {}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{}", c),
                1 => format!("{}*X", c),
                _ => format!("{}*X^{}", c, i),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Poly {
    pub fn new(ctx: &Arc<FieldCtx>, coeffs: Vec<FieldElement>) -> Poly {
        for c in &coeffs {
            assert!(c.ctx().same(ctx), "coefficient from a different field");
        }
        let mut p = Poly {
            ctx: ctx.clone(),
            coeffs,
        };
        p.trim();
        p
    }

    pub fn zero(ctx: &Arc<FieldCtx>) -> Poly {
        Poly {
            ctx: ctx.clone(),
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: FieldElement) -> Poly {
        let ctx = c.ctx().clone();
        Poly::new(&ctx, vec![c])
    }

    pub fn x(ctx: &Arc<FieldCtx>) -> Poly {
        Poly::new(ctx, vec![ctx.zero(), ctx.one()])
    }

    /// X - r.
    pub fn x_minus(r: &FieldElement) -> Poly {
        let ctx = r.ctx().clone();
        Poly::new(&ctx, vec![-r, ctx.one()])
    }

    fn trim(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Coefficient of X^i (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.ctx.zero())
    }

    pub fn leading(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) + &rhs.coeff(i)).collect();
        Poly::new(&self.ctx, coeffs)
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) - &rhs.coeff(i)).collect();
        Poly::new(&self.ctx, coeffs)
    }

    pub fn neg(&self) -> Poly {
        Poly::new(&self.ctx, self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(&self.ctx);
        }
        let mut out = vec![self.ctx.zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::new(&self.ctx, out)
    }

    pub fn scale(&self, c: &FieldElement) -> Poly {
        Poly::new(&self.ctx, self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiply by X^k.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![self.ctx.zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly::new(&self.ctx, coeffs)
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        let mut acc = self.ctx.zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// Quotient and remainder; `rhs` must be nonzero.
    pub fn divrem(&self, rhs: &Poly) -> (Poly, Poly) {
        let d = rhs.degree().expect("division by the zero polynomial");
        let lead_inv = rhs.leading().unwrap().inv().unwrap();
        let mut rem = self.coeffs.clone();
        let mut quo = vec![self.ctx.zero(); self.coeffs.len().saturating_sub(d)];
        while rem.len() > d {
            let k = rem.len() - 1 - d;
            let factor = &rem[rem.len() - 1] * &lead_inv;
            if !factor.is_zero() {
                quo[k] = factor.clone();
                for j in 0..=d {
                    rem[k + j] = &rem[k + j] - &(&factor * &rhs.coeffs[j]);
                }
            }
            rem.pop();
        }
        (Poly::new(&self.ctx, quo), Poly::new(&self.ctx, rem))
    }

    pub fn rem(&self, rhs: &Poly) -> Poly {
        self.divrem(rhs).1
    }

    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some(l) => self.scale(&l.inv().unwrap()),
        }
    }

    /// Monic gcd.
    pub fn gcd(&self, rhs: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = rhs.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn deriv(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero(&self.ctx);
        }
        let p = self.ctx.p();
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let n = self.ctx.from_packed(((i as u64 + 1) % p) % p);
                c * &n
            })
            .collect();
        Poly::new(&self.ctx, coeffs)
    }

    /// self^exp mod m, with deg m >= 1.
    pub fn pow_mod(&self, mut exp: u128, m: &Poly) -> Poly {
        assert!(m.degree().map_or(false, |d| d >= 1), "modulus must be nonconstant");
        let mut base = self.rem(m);
        let mut acc = Poly::constant(self.ctx.one());
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            exp >>= 1;
        }
        acc
    }

    /// Raise to the q-th power for q a power of the characteristic:
    /// (sum a_i X^i)^q = sum a_i^q X^{iq}.
    pub fn q_power(&self, q: u64) -> Poly {
        let p = self.ctx.p();
        let mut v = q;
        while v > 1 {
            assert!(v % p == 0, "{} is not a power of the characteristic", q);
            v /= p;
        }
        let Some(d) = self.degree() else {
            return self.clone();
        };
        let mut c = vec![self.ctx.zero(); d * (q as usize) + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if !a.is_zero() {
                c[i * q as usize] = a.pow(q as u128);
            }
        }
        Poly::new(&self.ctx, c)
    }

    /// Small non-negative integer power by repeated multiplication.
    pub fn pow_small(&self, k: usize) -> Poly {
        let mut acc = Poly::constant(self.ctx.one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Deterministic irreducibility test (gcd conditions on X^{card^k} - X).
    pub fn is_irreducible(&self) -> bool {
        let d = match self.degree() {
            None | Some(0) => return false,
            Some(d) => d,
        };
        if d == 1 {
            return true;
        }
        let card = self.ctx.cardinality();
        let f = self.monic();
        let x = Poly::x(&self.ctx);
        // t_k = X^{card^k} mod f, advanced one Frobenius step at a time
        let mut t = x.clone();
        let mut powers = Vec::with_capacity(d);
        for _ in 0..d {
            t = t.pow_mod(card as u128, &f);
            powers.push(t.clone());
        }
        if powers[d - 1] != x.rem(&f) {
            return false;
        }
        let mut primes = Vec::new();
        let mut n = d;
        let mut q = 2;
        while q * q <= n {
            if n % q == 0 {
                primes.push(q);
                while n % q == 0 {
                    n /= q;
                }
            }
            q += 1;
        }
        if n > 1 {
            primes.push(n);
        }
        for l in primes {
            let h = powers[d / l - 1].sub(&x);
            if f.gcd(&h).degree() != Some(0) {
                return false;
            }
        }
        true
    }

    /// All roots in the coefficient field with multiplicities, sorted by
    /// packed value.  Errors only on the zero polynomial.
    pub fn roots(&self) -> Result<Vec<(FieldElement, usize)>, FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroPolynomial);
        }
        if self.degree() == Some(0) {
            return Ok(Vec::new());
        }
        let card = self.ctx.cardinality();
        let distinct: Vec<FieldElement> = if card <= EXHAUSTIVE_LIMIT {
            self.ctx
                .iter_elements()
                .filter(|x| self.eval(x).is_zero())
                .collect()
        } else {
            let f = self.monic();
            // squarefree product of the linear factors
            let xq = Poly::x(&self.ctx).pow_mod(card as u128, &f);
            let g = f.gcd(&xq.sub(&Poly::x(&self.ctx)));
            let mut found = Vec::new();
            self.split_linear_product(&g, &mut found);
            found.sort_by_key(|r| r.packed());
            found
        };
        let mut out = Vec::with_capacity(distinct.len());
        let mut sorted = distinct;
        sorted.sort_by_key(|r| r.packed());
        for r in sorted {
            let lin = Poly::x_minus(&r);
            let mut mult = 0;
            let mut rest = self.clone();
            loop {
                let (q, rem) = rest.divrem(&lin);
                if !rem.is_zero() {
                    break;
                }
                mult += 1;
                rest = q;
            }
            debug_assert!(mult >= 1);
            out.push((r, mult));
        }
        Ok(out)
    }

    /// g is monic and a product of distinct linear factors; push its roots.
    fn split_linear_product(&self, g: &Poly, out: &mut Vec<FieldElement>) {
        match g.degree() {
            None | Some(0) => return,
            Some(1) => {
                out.push(-&g.coeffs[0]);
                return;
            }
            _ => {}
        }
        let card = self.ctx.cardinality();
        // fixed seed: the probe sequence, and with it the whole recursion,
        // depends on nothing but g
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
        let probes = (0..SPLIT_PROBES)
            .map(|_| self.ctx.from_packed(rng.gen_range(0..card)))
            .chain(self.ctx.iter_elements());
        for a in probes {
            if let Some(h) = self.try_split(g, &a) {
                let (q, r) = g.divrem(&h);
                debug_assert!(r.is_zero());
                self.split_linear_product(&h, out);
                self.split_linear_product(&q.monic(), out);
                return;
            }
        }
        unreachable!("a separable product of linear factors always splits");
    }

    /// One splitting probe with parameter `a`: gcd of g with the character
    /// map (x + a)^((card-1)/2) - 1 for odd p, or with the trace of a*x for
    /// p = 2.  Returns a proper factor when the probe separates the roots.
    fn try_split(&self, g: &Poly, a: &FieldElement) -> Option<Poly> {
        let card = self.ctx.cardinality();
        let acc = if self.ctx.p() != 2 {
            let half = ((card - 1) / 2) as u128;
            let base = Poly::new(&self.ctx, vec![a.clone(), self.ctx.one()]);
            base.pow_mod(half, g).sub(&Poly::constant(self.ctx.one()))
        } else {
            if a.is_zero() {
                return None;
            }
            // trace map over F_{2^E}: y + y^2 + ... + y^{2^(E-1)}, at y = a*x
            let ax = Poly::new(&self.ctx, vec![self.ctx.zero(), a.clone()]).rem(g);
            let mut t = ax.clone();
            let mut acc = ax;
            let mut c = card;
            while c > 2 {
                c /= 2;
                t = t.mul(&t).rem(g);
                acc = acc.add(&t);
            }
            acc
        };
        let h = g.gcd(&acc);
        let dh = h.degree().unwrap_or(0);
        (dh > 0 && dh < g.degree().unwrap()).then_some(h)
    }
}
