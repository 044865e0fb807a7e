//! Truncated power series over a finite field.
//!
//! A [`Series`] with n stored coefficients represents a power series known
//! modulo t^n.  Binary operations truncate to the weaker of the two
//! precisions, so a computed coefficient is always an exact statement about
//! the underlying series.  The q-power map is exact in characteristic p | q:
//! (sum a_i t^i)^q = sum a_i^q t^{iq}, which is what makes Artin-Schreier
//! equations solvable coefficient-free.

use std::sync::Arc;

use crate::field::{FieldCtx, FieldElement};

#[derive(Clone)]
pub struct Series {
    ctx: Arc<FieldCtx>,
    c: Vec<FieldElement>,
}

impl PartialEq for Series {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same(&other.ctx) && self.c == other.c
    }
}

impl Eq for Series {}

impl std::fmt::Debug for Series {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let terms: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .take(8)
            .map(|(i, a)| format!("{}*t^{}", a, i))
            .collect();
        write!(
            f,
            "{} + O(t^{})",
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            },
            self.c.len()
        )
    }
}

impl Series {
    pub fn new(ctx: &Arc<FieldCtx>, coeffs: Vec<FieldElement>) -> Series {
        Series {
            ctx: ctx.clone(),
            c: coeffs,
        }
    }

    pub fn zero(ctx: &Arc<FieldCtx>, prec: usize) -> Series {
        Series {
            ctx: ctx.clone(),
            c: vec![ctx.zero(); prec],
        }
    }

    pub fn constant(value: &FieldElement, prec: usize) -> Series {
        let ctx = value.ctx().clone();
        let mut c = vec![ctx.zero(); prec];
        if prec > 0 {
            c[0] = value.clone();
        }
        Series { ctx, c }
    }

    /// The identity series t.
    pub fn t(ctx: &Arc<FieldCtx>, prec: usize) -> Series {
        let mut c = vec![ctx.zero(); prec];
        if prec > 1 {
            c[1] = ctx.one();
        }
        Series {
            ctx: ctx.clone(),
            c,
        }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn prec(&self) -> usize {
        self.c.len()
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.c.get(i).cloned().unwrap_or_else(|| self.ctx.zero())
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.c
    }

    /// Index of the first nonzero coefficient; None when the series vanishes
    /// to its whole precision.
    pub fn order(&self) -> Option<usize> {
        self.c.iter().position(|a| !a.is_zero())
    }

    pub fn truncate(&self, prec: usize) -> Series {
        let mut c = self.c.clone();
        c.truncate(prec);
        Series {
            ctx: self.ctx.clone(),
            c,
        }
    }

    pub fn add(&self, rhs: &Series) -> Series {
        let n = self.prec().min(rhs.prec());
        let c = (0..n).map(|i| &self.c[i] + &rhs.c[i]).collect();
        Series {
            ctx: self.ctx.clone(),
            c,
        }
    }

    pub fn sub(&self, rhs: &Series) -> Series {
        let n = self.prec().min(rhs.prec());
        let c = (0..n).map(|i| &self.c[i] - &rhs.c[i]).collect();
        Series {
            ctx: self.ctx.clone(),
            c,
        }
    }

    pub fn neg(&self) -> Series {
        Series {
            ctx: self.ctx.clone(),
            c: self.c.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, k: &FieldElement) -> Series {
        Series {
            ctx: self.ctx.clone(),
            c: self.c.iter().map(|a| a * k).collect(),
        }
    }

    pub fn mul(&self, rhs: &Series) -> Series {
        let n = self.prec().min(rhs.prec());
        let mut c = vec![self.ctx.zero(); n];
        for (i, a) in self.c.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate().take(n - i) {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        Series {
            ctx: self.ctx.clone(),
            c,
        }
    }

    /// Multiplicative inverse; the constant term must be a unit.
    pub fn inv(&self) -> Series {
        let a0 = self.coeff(0);
        let inv0 = a0.inv().expect("series with zero constant term has no inverse");
        let n = self.prec();
        let mut b = vec![self.ctx.zero(); n];
        if n == 0 {
            return Series {
                ctx: self.ctx.clone(),
                c: b,
            };
        }
        b[0] = inv0.clone();
        for k in 1..n {
            let mut acc = self.ctx.zero();
            for i in 1..=k {
                acc = &acc + &(&self.coeff(i) * &b[k - i]);
            }
            b[k] = -&(&inv0 * &acc);
        }
        Series {
            ctx: self.ctx.clone(),
            c: b,
        }
    }

    /// Raise to the q-th power for q a power of the characteristic.  The
    /// result is truncated back to this precision, which is sound because the
    /// unknown tail only influences exponents >= q * prec.
    pub fn q_power(&self, q: u64) -> Series {
        let p = self.ctx.p();
        let mut v = q;
        while v > 1 {
            assert!(v % p == 0, "{} is not a power of the characteristic", q);
            v /= p;
        }
        let n = self.prec();
        let mut c = vec![self.ctx.zero(); n];
        for (i, a) in self.c.iter().enumerate() {
            let j = (i as u64).checked_mul(q).unwrap();
            if (j as usize) < n && !a.is_zero() {
                c[j as usize] = a.pow(q as u128);
            }
        }
        Series {
            ctx: self.ctx.clone(),
            c,
        }
    }

    /// Multiply by t^k; precision grows by k since nothing new is unknown.
    pub fn mul_t_power(&self, k: usize) -> Series {
        let mut c = vec![self.ctx.zero(); k];
        c.extend(self.c.iter().cloned());
        Series {
            ctx: self.ctx.clone(),
            c,
        }
    }

    /// Divide by t^k; the first k coefficients must vanish.
    pub fn div_t_power(&self, k: usize) -> Series {
        assert!(
            self.c.iter().take(k).all(|a| a.is_zero()),
            "series is not divisible by t^{}",
            k
        );
        Series {
            ctx: self.ctx.clone(),
            c: self.c.iter().skip(k).cloned().collect(),
        }
    }
}

/// The unique power series u with u(0) = 0 and u^q - u = h, for h with
/// positive order: u = -(h + h^q + h^{q^2} + ...), a finite sum at any
/// precision.
pub fn artin_schreier_sum(h: &Series, q: u64) -> Series {
    assert!(
        h.coeff(0).is_zero(),
        "the right-hand side must vanish at the origin"
    );
    let mut acc = Series::zero(h.ctx(), h.prec());
    let mut term = h.clone();
    while term.order().is_some() {
        acc = acc.add(&term);
        term = term.q_power(q);
    }
    acc.neg()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    fn s(ctx: &Arc<FieldCtx>, packed: &[u64]) -> Series {
        Series::new(ctx, packed.iter().map(|&v| ctx.from_packed(v)).collect())
    }

    #[test]
    fn geometric_series_inverse() {
        let f5 = FieldCtx::build(5, 1).unwrap();
        let one_minus_t = s(&f5, &[1, 4, 0, 0, 0, 0]);
        let inv = one_minus_t.inv();
        assert_eq!(inv, s(&f5, &[1, 1, 1, 1, 1, 1]));
        let prod = one_minus_t.mul(&inv);
        assert_eq!(prod.coeff(0), f5.one());
        assert!(prod.order() == Some(0) && prod.c[1..].iter().all(|a| a.is_zero()));
    }

    #[test]
    fn freshman_dream_cube() {
        let f3 = FieldCtx::build(3, 1).unwrap();
        let one_plus_t = s(&f3, &[1, 1, 0, 0, 0, 0, 0]);
        let direct = one_plus_t.mul(&one_plus_t).mul(&one_plus_t);
        let fast = one_plus_t.q_power(3);
        assert_eq!(direct, fast.truncate(direct.prec()));
        assert_eq!(fast, s(&f3, &[1, 0, 0, 1, 0, 0, 0]));
    }

    #[test]
    fn q_power_over_extension_field() {
        let f9 = FieldCtx::build(3, 2).unwrap();
        let g = f9.generator();
        let a = Series::new(&f9, vec![f9.zero(), g.clone(), f9.from_packed(5)]).mul_t_power(0);
        // compare against repeated multiplication at matching precision
        let wide = Series::new(
            &f9,
            a.coeffs()
                .iter()
                .cloned()
                .chain(std::iter::repeat(f9.zero()).take(24))
                .collect(),
        );
        let mut direct = Series::constant(&f9.one(), wide.prec());
        for _ in 0..9 {
            direct = direct.mul(&wide);
        }
        let fast = wide.q_power(9);
        assert_eq!(direct, fast);
    }

    #[test]
    fn order_and_t_power_shifts() {
        let f3 = FieldCtx::build(3, 1).unwrap();
        let x = s(&f3, &[0, 0, 2, 1]);
        assert_eq!(x.order(), Some(2));
        assert_eq!(x.mul_t_power(2).order(), Some(4));
        assert_eq!(x.mul_t_power(2).prec(), 6);
        assert_eq!(x.div_t_power(2).order(), Some(0));
        assert_eq!(Series::zero(&f3, 4).order(), None);
    }

    #[test]
    fn artin_schreier_solution_satisfies_its_equation() {
        for (p, e, q) in [(3u64, 1usize, 3u64), (2, 2, 4), (3, 2, 9)] {
            let ctx = FieldCtx::build(p, e).unwrap();
            let n = 30;
            // h = g*t + t^2 (g a generator), order 1
            let mut coeffs = vec![ctx.zero(); n];
            coeffs[1] = ctx.generator();
            coeffs[2] = ctx.one();
            let h = Series::new(&ctx, coeffs);
            let u = artin_schreier_sum(&h, q);
            assert!(u.coeff(0).is_zero());
            let residual = u.q_power(q).sub(&u).sub(&h);
            assert_eq!(residual.order(), None, "u^q - u != h for q = {}", q);
        }
    }

    #[test]
    fn precision_tracks_the_weaker_operand() {
        let f3 = FieldCtx::build(3, 1).unwrap();
        let a = Series::zero(&f3, 10);
        let b = Series::zero(&f3, 4);
        assert_eq!(a.add(&b).prec(), 4);
        assert_eq!(a.mul(&b).prec(), 4);
    }
}
