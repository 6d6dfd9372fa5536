//! Arithmetic in GF(2^n) with a fixed polynomial basis, and the degree-4
//! extension GF(q^4) used to realize Singer cycles as 4x4 matrices over GF(q).
//!
//! Elements are bitmasks: bit `i` is the coefficient of `t^i`. The moduli are
//! fixed in [`MODULI`] so that every index derived from them downstream is
//! reproducible.

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat4;

/// Least irreducible polynomial (numerically) of each degree 1..=32, as a
/// bitmask including the leading term.
pub const MODULI: [u64; 32] = [
    0x3,
    0x7,
    0xb,
    0x13,
    0x25,
    0x43,
    0x83,
    0x11b,
    0x203,
    0x409,
    0x805,
    0x1009,
    0x201b,
    0x4021,
    0x8003,
    0x1002b,
    0x20009,
    0x40009,
    0x80027,
    0x100009,
    0x200005,
    0x400003,
    0x800021,
    0x100001b,
    0x2000009,
    0x400001b,
    0x8000027,
    0x10000003,
    0x20000005,
    0x40000003,
    0x80000009,
    0x10000008d,
];

/// Largest degree for which log/exp tables are built.
const TABLE_DEGREE: u32 = 16;

/// An element of GF(2^n) in polynomial-basis coordinates.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElem(pub u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl Add for FieldElem {
    type Output = FieldElem;

    // characteristic 2: addition is XOR
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: FieldElem) -> FieldElem {
        FieldElem(self.0 ^ rhs.0)
    }
}

/// Carry-less product of two polynomials of degree < 32.
#[inline]
pub fn clmul(a: u64, b: u64) -> u64 {
    let mut r = 0u64;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        b >>= 1;
        a <<= 1;
    }
    r
}

#[inline]
fn degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

/// Remainder of `a` modulo `m` in GF(2)[x].
pub fn poly_rem(mut a: u64, m: u64) -> u64 {
    let dm = degree(m);
    while a != 0 && degree(a) >= dm {
        a ^= m << (degree(a) - dm);
    }
    a
}

/// Irreducibility by trial division against every polynomial of degree
/// 1..=deg/2.
pub fn is_irreducible(m: u64) -> bool {
    let d = degree(m);
    if d < 1 {
        return false;
    }
    for dd in 1..=d / 2 {
        for p in (1u64 << dd)..(1u64 << (dd + 1)) {
            if poly_rem(m, p) == 0 {
                return false;
            }
        }
    }
    true
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// The field GF(2^n) for a fixed modulus.
#[derive(Clone)]
pub struct FieldCtx {
    n: u32,
    modulus: u64,
    generator: FieldElem,
    // exp has length 2(q-1) so that exp[log a + log b] needs no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("n", &self.n)
            .field("modulus", &format_args!("{:#x}", self.modulus))
            .field("generator", &self.generator)
            .finish()
    }
}

impl FieldCtx {
    /// GF(2^n) with the built-in modulus.
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n as usize > MODULI.len() {
            return Err(Error::UnsupportedDegree(n));
        }
        Self::with_modulus(n, MODULI[n as usize - 1])
    }

    pub fn with_modulus(n: u32, modulus: u64) -> Result<Self> {
        if n == 0 || n > 32 {
            return Err(Error::UnsupportedDegree(n));
        }
        if degree(modulus) != n as i32 || !is_irreducible(modulus) {
            return Err(Error::Reducible { degree: n, modulus });
        }
        let mut ctx = FieldCtx {
            n,
            modulus,
            generator: FieldElem::ONE,
            exp: Vec::new(),
            log: Vec::new(),
        };
        ctx.generator = ctx.find_primitive();
        if n <= TABLE_DEGREE {
            ctx.build_tables();
        }
        Ok(ctx)
    }

    fn find_primitive(&self) -> FieldElem {
        let group = self.unit_count();
        let factors = prime_factors(group);
        (1..=u32::MAX)
            .map(FieldElem)
            .find(|&g| factors.iter().all(|&p| self.pow(g, group / p) != FieldElem::ONE))
            .expect("a finite field has a primitive element")
    }

    fn build_tables(&mut self) {
        let units = self.unit_count() as usize;
        let mut exp = vec![0u32; 2 * units];
        let mut log = vec![0u32; units + 1];
        let mut x = FieldElem::ONE;
        for i in 0..units {
            exp[i] = x.0;
            log[x.0 as usize] = i as u32;
            x = self.mul_slow(x, self.generator);
        }
        for i in units..2 * units {
            exp[i] = exp[i - units];
        }
        self.exp = exp;
        self.log = log;
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn generator(&self) -> FieldElem {
        self.generator
    }

    /// Field size 2^n.
    #[inline]
    pub fn order(&self) -> u64 {
        1u64 << self.n
    }

    #[inline]
    pub fn unit_count(&self) -> u64 {
        self.order() - 1
    }

    /// All elements in increasing bitmask order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + Clone {
        (0..self.order()).map(|v| FieldElem(v as u32))
    }

    pub fn contains(&self, a: FieldElem) -> bool {
        (a.0 as u64) < self.order()
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        if self.exp.is_empty() {
            return self.mul_slow(a, b);
        }
        let s = self.log[a.0 as usize] + self.log[b.0 as usize];
        FieldElem(self.exp[s as usize])
    }

    fn mul_slow(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(poly_rem(clmul(a.0 as u64, b.0 as u64), self.modulus) as u32)
    }

    #[inline]
    pub fn square(&self, a: FieldElem) -> FieldElem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut base = a;
        let mut acc = FieldElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, computed as a^(2^n - 2).
    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        if !self.exp.is_empty() {
            let units = self.unit_count() as u32;
            let l = self.log[a.0 as usize];
            return Ok(FieldElem(self.exp[((units - l) % units) as usize]));
        }
        Ok(self.pow(a, self.order() - 2))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: FieldElem) -> Result<u64> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        let mut ord = self.unit_count();
        for p in prime_factors(ord) {
            while ord % p == 0 && self.pow(a, ord / p) == FieldElem::ONE {
                ord /= p;
            }
        }
        Ok(ord)
    }

    /// The Frobenius power x -> x^(2^k).
    pub fn frobenius(&self, a: FieldElem, k: u32) -> FieldElem {
        (0..k).fold(a, |x, _| self.square(x))
    }
}

/// GF(q^4) = GF(2^{4n}) together with the copy of GF(q) inside it and the
/// GF(q)-basis {1, w, w^2, w^3} for the chosen primitive w.
#[derive(Clone, Debug)]
pub struct ExtFieldCtx {
    base: FieldCtx,
    big: FieldCtx,
    embed: Vec<FieldElem>,
    basis: [FieldElem; 4],
    // GF(2)-echelon form of the 4n basis vectors embed(t^j) * w^i; each entry
    // is (value, coordinate mask) with a distinct leading bit.
    echelon: Vec<(u64, u64)>,
}

impl ExtFieldCtx {
    pub fn new(n: u32) -> Result<Self> {
        let base = FieldCtx::new(n)?;
        let big = FieldCtx::new(4 * n)?;
        let omega = big.generator();

        // The subfield of order q is generated by w^((q^4-1)/(q-1)); pick the
        // first power that is a root of the base modulus.
        let gamma = big.pow(omega, big.unit_count() / base.unit_count());
        let root = {
            let mut r = FieldElem::ONE;
            let mut found = None;
            for _ in 0..base.unit_count() {
                if eval_poly(&big, base.modulus(), r).is_zero() {
                    found = Some(r);
                    break;
                }
                r = big.mul(r, gamma);
            }
            found.expect("base modulus splits in the subfield of order q")
        };
        let mut root_powers = Vec::with_capacity(n as usize);
        let mut r = FieldElem::ONE;
        for _ in 0..n {
            root_powers.push(r);
            r = big.mul(r, root);
        }
        let embed: Vec<FieldElem> = base
            .elements()
            .map(|a| {
                root_powers
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| a.0 >> j & 1 == 1)
                    .fold(FieldElem::ZERO, |acc, (_, &p)| acc + p)
            })
            .collect();

        let mut basis = [FieldElem::ONE; 4];
        for i in 1..4 {
            basis[i] = big.mul(basis[i - 1], omega);
        }

        let mut echelon: Vec<(u64, u64)> = Vec::new();
        for (i, &b) in basis.iter().enumerate() {
            for (j, &rp) in root_powers.iter().enumerate() {
                let mut value = big.mul(rp, b).0 as u64;
                let mut mask = 1u64 << (i * n as usize + j);
                for &(ev, em) in &echelon {
                    if value >> degree(ev) & 1 == 1 {
                        value ^= ev;
                        mask ^= em;
                    }
                }
                assert!(value != 0, "basis of GF(q^4) over GF(q) is independent");
                // keep the echelon fully reduced so decomposition is one pass
                let lead = degree(value);
                for e in echelon.iter_mut() {
                    if e.0 >> lead & 1 == 1 {
                        e.0 ^= value;
                        e.1 ^= mask;
                    }
                }
                echelon.push((value, mask));
            }
        }

        Ok(ExtFieldCtx {
            base,
            big,
            embed,
            basis,
            echelon,
        })
    }

    pub fn base(&self) -> &FieldCtx {
        &self.base
    }

    pub fn big(&self) -> &FieldCtx {
        &self.big
    }

    /// The primitive element w of GF(q^4).
    pub fn omega(&self) -> FieldElem {
        self.basis[1]
    }

    pub fn basis(&self) -> [FieldElem; 4] {
        self.basis
    }

    /// Field embedding GF(q) -> GF(q^4).
    pub fn embed(&self, a: FieldElem) -> FieldElem {
        self.embed[a.0 as usize]
    }

    /// GF(q)-coordinates of `x` in the basis {1, w, w^2, w^3}.
    pub fn coords(&self, x: FieldElem) -> [FieldElem; 4] {
        let mut value = x.0 as u64;
        let mut mask = 0u64;
        for &(ev, em) in &self.echelon {
            if value >> degree(ev) & 1 == 1 {
                value ^= ev;
                mask ^= em;
            }
        }
        debug_assert_eq!(value, 0);
        let n = self.base.n();
        let low = (1u64 << n) - 1;
        std::array::from_fn(|i| FieldElem((mask >> (i as u32 * n) & low) as u32))
    }

    pub fn from_coords(&self, c: [FieldElem; 4]) -> FieldElem {
        c.iter()
            .zip(self.basis.iter())
            .fold(FieldElem::ZERO, |acc, (&ci, &b)| acc + self.big.mul(self.embed(ci), b))
    }

    /// Matrix of v -> omega * v on GF(q^4) = GF(q)^4, acting on column
    /// coordinate vectors.
    pub fn mult_matrix(&self, omega: FieldElem) -> Result<Mat4> {
        if omega.is_zero() {
            return Err(Error::ZeroElement);
        }
        let mut m = Mat4::zero();
        for (j, &b) in self.basis.iter().enumerate() {
            let col = self.coords(self.big.mul(omega, b));
            for i in 0..4 {
                m.0[i][j] = col[i];
            }
        }
        Ok(m)
    }
}

/// Evaluate a GF(2)-coefficient polynomial (bitmask) at `x`.
fn eval_poly(ctx: &FieldCtx, poly: u64, x: FieldElem) -> FieldElem {
    let d = degree(poly);
    let mut acc = FieldElem::ZERO;
    for i in (0..=d).rev() {
        acc = ctx.mul(acc, x);
        if poly >> i & 1 == 1 {
            acc = acc + FieldElem::ONE;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    // Schoolbook GF(4) table with modulus t^2 + t + 1, written out by hand:
    // elements 0, 1, t, t+1 as 0, 1, 2, 3.
    const GF4_MUL: [[u32; 4]; 4] = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];

    #[test]
    fn moduli_are_irreducible() {
        for (i, &m) in MODULI.iter().enumerate().take(12) {
            assert!(is_irreducible(m), "degree {}", i + 1);
            assert_eq!(degree(m), i as i32 + 1);
        }
        assert!(!is_irreducible(0b101)); // x^2 + 1 = (x+1)^2
    }

    #[test]
    fn gf4_examples() {
        let f = FieldCtx::new(2).unwrap();
        let t = FieldElem(0b10);
        assert_eq!(t + FieldElem::ONE, FieldElem(0b11));
        assert_eq!(f.mul(t, t), FieldElem(0b11));
        assert_eq!(f.inv(t).unwrap(), FieldElem(0b11));
        assert_eq!(f.inv(FieldElem::ONE).unwrap(), FieldElem::ONE);
        for a in 0..4u32 {
            for b in 0..4u32 {
                assert_eq!(f.mul(FieldElem(a), FieldElem(b)).0, GF4_MUL[a as usize][b as usize]);
            }
        }
    }

    #[test]
    fn inverse_of_zero_fails() {
        let f = FieldCtx::new(3).unwrap();
        assert_eq!(f.inv(FieldElem::ZERO), Err(Error::ZeroInverse));
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for n in 1..=3 {
            let f = FieldCtx::new(n).unwrap();
            for a in f.elements() {
                assert!((a + a).is_zero());
                assert_eq!(a + FieldElem::ZERO, a);
                assert_eq!(f.mul(a, FieldElem::ONE), a);
                if !a.is_zero() {
                    let ai = f.inv(a).unwrap();
                    assert_eq!(f.mul(a, ai), FieldElem::ONE);
                    assert_eq!(f.inv(ai).unwrap(), a);
                }
                for b in f.elements() {
                    for c in f.elements() {
                        assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn distributivity_sampled() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [4u32, 8, 12, 32] {
            let f = FieldCtx::new(n).unwrap();
            let mask = ((1u64 << n) - 1) as u32;
            for _ in 0..10_000 {
                let a = FieldElem(rng.gen::<u32>() & mask);
                let b = FieldElem(rng.gen::<u32>() & mask);
                let c = FieldElem(rng.gen::<u32>() & mask);
                assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
            }
        }
    }

    #[test]
    fn table_and_slow_multiply_agree() {
        let f = FieldCtx::new(8).unwrap();
        for a in f.elements() {
            for b in f.elements().step_by(7) {
                assert_eq!(f.mul(a, b), f.mul_slow(a, b));
            }
        }
    }

    #[test]
    fn generator_is_primitive() {
        for n in 1..=16 {
            let f = FieldCtx::new(n).unwrap();
            assert_eq!(f.element_order(f.generator()).unwrap(), f.unit_count());
        }
        let f = FieldCtx::new(32).unwrap();
        assert_eq!(f.element_order(f.generator()).unwrap(), f.unit_count());
    }

    #[test]
    fn frobenius_fixes_exactly_gf2() {
        for n in 1..=6 {
            let f = FieldCtx::new(n).unwrap();
            let fixed: Vec<_> = f.elements().filter(|&a| f.square(a) == a).collect();
            assert_eq!(fixed, vec![FieldElem::ZERO, FieldElem::ONE]);
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.square(f.mul(a, b)), f.mul(f.square(a), f.square(b)));
                    assert_eq!(f.square(a + b), f.square(a) + f.square(b));
                }
            }
        }
    }

    #[test]
    fn subfield_embedding_is_a_homomorphism() {
        for n in 1..=3 {
            let ext = ExtFieldCtx::new(n).unwrap();
            let (b, big) = (ext.base(), ext.big());
            assert_eq!(ext.embed(FieldElem::ZERO), FieldElem::ZERO);
            assert_eq!(ext.embed(FieldElem::ONE), FieldElem::ONE);
            for x in b.elements() {
                for y in b.elements() {
                    assert_eq!(ext.embed(x + y), ext.embed(x) + ext.embed(y));
                    assert_eq!(ext.embed(b.mul(x, y)), big.mul(ext.embed(x), ext.embed(y)));
                }
            }
        }
    }

    #[test]
    fn subfield_image_is_fixed_set_of_q_power() {
        for n in 1..=2 {
            let ext = ExtFieldCtx::new(n).unwrap();
            let big = ext.big();
            let mut fixed: Vec<_> = big
                .elements()
                .filter(|&x| big.frobenius(x, n) == x)
                .collect();
            let mut image: Vec<_> = ext.base().elements().map(|a| ext.embed(a)).collect();
            fixed.sort();
            image.sort();
            assert_eq!(fixed, image);
        }
        // sampled at n = 3: image elements are fixed by x -> x^8
        let ext = ExtFieldCtx::new(3).unwrap();
        for a in ext.base().elements() {
            let x = ext.embed(a);
            assert_eq!(ext.big().frobenius(x, 3), x);
        }
    }

    #[test]
    fn coordinates_round_trip() {
        for n in 1..=3 {
            let ext = ExtFieldCtx::new(n).unwrap();
            for x in ext.big().elements() {
                assert_eq!(ext.from_coords(ext.coords(x)), x);
            }
        }
    }

    #[test]
    fn mult_matrix_is_multiplicative() {
        let ext = ExtFieldCtx::new(2).unwrap();
        let (f, big) = (ext.base(), ext.big());
        assert_eq!(ext.mult_matrix(FieldElem::ONE).unwrap(), Mat4::identity());
        assert_eq!(ext.mult_matrix(FieldElem::ZERO), Err(Error::ZeroElement));
        for a in big.elements().skip(1).step_by(5) {
            let ma = ext.mult_matrix(a).unwrap();
            let mi = ext.mult_matrix(big.inv(a).unwrap()).unwrap();
            assert_eq!(ma.mul(&mi, f), Mat4::identity());
            for v in big.elements().step_by(3) {
                let got = ma.apply(&ext.coords(v), f);
                assert_eq!(got, ext.coords(big.mul(a, v)));
            }
            for b in big.elements().skip(1).step_by(11) {
                let mb = ext.mult_matrix(b).unwrap();
                assert_eq!(ma.mul(&mb, f), ext.mult_matrix(big.mul(a, b)).unwrap());
            }
        }
    }
}
