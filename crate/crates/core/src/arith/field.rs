//! Prime fields and their quadratic extensions.
//!
//! An element of F_{p^k} is stored as `a + b·t` where `t² = u` and `u` is the
//! least quadratic nonresidue mod p; for k = 1 the `b` slot stays zero.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::nt::{is_prime_u64, jacobi_u64, mulmod, powmod};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fqe {
    pub a: u32,
    pub b: u32,
}

impl Fqe {
    pub const ZERO: Fqe = Fqe { a: 0, b: 0 };
    pub const ONE: Fqe = Fqe { a: 1, b: 0 };

    #[inline]
    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fq {
    p: u64,
    k: u8,
    nonres: u64,
}

impl Fq {
    /// F_p for an odd prime p < 2³¹.
    pub fn prime(p: u64) -> Result<Fq> {
        if p < 3 || p >= 1 << 31 || !is_prime_u64(p) {
            return Err(Error::Invalid(format!("{p} is not an odd prime below 2^31")));
        }
        Ok(Fq { p, k: 1, nonres: least_nonresidue(p) })
    }

    /// F_{p²} = F_p[t]/(t² − u).
    pub fn quadratic(p: u64) -> Result<Fq> {
        let f = Fq::prime(p)?;
        Ok(Fq { k: 2, ..f })
    }

    pub fn new(p: u64, k: u8) -> Result<Fq> {
        match k {
            1 => Fq::prime(p),
            2 => Fq::quadratic(p),
            _ => Err(Error::Invalid(format!("extension degree {k} unsupported"))),
        }
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }
    #[inline]
    pub fn k(&self) -> u8 {
        self.k
    }
    /// The constant u of the modulus t² − u.
    pub fn nonresidue(&self) -> u64 {
        self.nonres
    }
    pub fn size(&self) -> u64 {
        self.p.pow(self.k as u32)
    }
    pub fn base(&self) -> Fq {
        Fq { k: 1, ..*self }
    }

    #[inline]
    pub fn from_u64(&self, x: u64) -> Fqe {
        Fqe { a: (x % self.p) as u32, b: 0 }
    }
    #[inline]
    pub fn from_i64(&self, x: i64) -> Fqe {
        Fqe { a: x.rem_euclid(self.p as i64) as u32, b: 0 }
    }
    pub fn from_bigint(&self, x: &BigInt) -> Fqe {
        let r = x.mod_floor(&BigInt::from(self.p)).to_u64().unwrap();
        Fqe { a: r as u32, b: 0 }
    }
    pub fn pair(&self, a: u64, b: u64) -> Fqe {
        debug_assert!(self.k == 2 || b == 0);
        Fqe { a: (a % self.p) as u32, b: (b % self.p) as u32 }
    }
    /// The generator t of F_{p²} over F_p.
    pub fn gen(&self) -> Fqe {
        assert_eq!(self.k, 2);
        Fqe { a: 0, b: 1 }
    }

    #[inline]
    fn addp(&self, x: u32, y: u32) -> u32 {
        let s = x as u64 + y as u64;
        (if s >= self.p { s - self.p } else { s }) as u32
    }
    #[inline]
    fn subp(&self, x: u32, y: u32) -> u32 {
        (if x >= y { x as u64 - y as u64 } else { x as u64 + self.p - y as u64 }) as u32
    }
    #[inline]
    fn mulp(&self, x: u32, y: u32) -> u32 {
        (x as u64 * y as u64 % self.p) as u32
    }

    #[inline]
    pub fn add(&self, x: Fqe, y: Fqe) -> Fqe {
        Fqe { a: self.addp(x.a, y.a), b: self.addp(x.b, y.b) }
    }
    #[inline]
    pub fn sub(&self, x: Fqe, y: Fqe) -> Fqe {
        Fqe { a: self.subp(x.a, y.a), b: self.subp(x.b, y.b) }
    }
    #[inline]
    pub fn neg(&self, x: Fqe) -> Fqe {
        self.sub(Fqe::ZERO, x)
    }
    #[inline]
    pub fn mul(&self, x: Fqe, y: Fqe) -> Fqe {
        if self.k == 1 {
            return Fqe { a: self.mulp(x.a, y.a), b: 0 };
        }
        let p = self.p;
        let ac = x.a as u64 * y.a as u64 % p;
        let bd = x.b as u64 * y.b as u64 % p;
        let ad = x.a as u64 * y.b as u64;
        let bc = x.b as u64 * y.a as u64;
        Fqe {
            a: ((ac + bd * self.nonres) % p) as u32,
            b: ((ad + bc) % p) as u32,
        }
    }
    #[inline]
    pub fn sqr(&self, x: Fqe) -> Fqe {
        self.mul(x, x)
    }
    pub fn pow(&self, mut x: Fqe, mut e: u64) -> Fqe {
        let mut r = Fqe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, x);
            }
            x = self.sqr(x);
            e >>= 1;
        }
        r
    }
    /// Norm down to F_p: a² − u·b².
    pub fn norm(&self, x: Fqe) -> u64 {
        let p = self.p;
        let a2 = mulmod(x.a as u64, x.a as u64, p);
        let b2 = mulmod(mulmod(x.b as u64, x.b as u64, p), self.nonres, p);
        (a2 + p - b2) % p
    }
    pub fn inv(&self, x: Fqe) -> Option<Fqe> {
        if x.is_zero() {
            return None;
        }
        if self.k == 1 {
            return Some(Fqe { a: powmod(x.a as u64, self.p - 2, self.p) as u32, b: 0 });
        }
        let n = self.norm(x);
        let ni = powmod(n, self.p - 2, self.p);
        let conj = Fqe { a: x.a, b: self.subp(0, x.b) };
        Some(self.mul(conj, self.from_u64(ni)))
    }
    pub fn div(&self, x: Fqe, y: Fqe) -> Option<Fqe> {
        self.inv(y).map(|yi| self.mul(x, yi))
    }
    pub fn frobenius(&self, x: Fqe) -> Fqe {
        // t^p = u^((p−1)/2)·t = −t
        Fqe { a: x.a, b: self.subp(0, x.b) }
    }

    /// Quadratic character: 0, 1 or −1.
    pub fn chi(&self, x: Fqe) -> i32 {
        if x.is_zero() {
            return 0;
        }
        let n = if self.k == 1 { x.a as u64 } else { self.norm(x) };
        jacobi_u64(n, self.p)
    }
    pub fn is_square(&self, x: Fqe) -> bool {
        self.chi(x) >= 0
    }

    /// Tonelli-Shanks square root.
    pub fn sqrt(&self, x: Fqe) -> Option<Fqe> {
        if x.is_zero() {
            return Some(x);
        }
        if self.chi(x) != 1 {
            return None;
        }
        let q = self.size();
        let s = (q - 1).trailing_zeros();
        let t = (q - 1) >> s;
        let z = self.non_square();
        let mut m = s;
        let mut c = self.pow(z, t);
        let mut r = self.pow(x, (t + 1) / 2);
        let mut tt = self.pow(x, t);
        while tt != Fqe::ONE {
            let mut i = 0;
            let mut w = tt;
            while w != Fqe::ONE {
                w = self.sqr(w);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.sqr(b);
            }
            m = i;
            c = self.sqr(b);
            tt = self.mul(tt, c);
            r = self.mul(r, b);
        }
        Some(r)
    }

    fn non_square(&self) -> Fqe {
        if self.k == 1 {
            return self.from_u64(self.nonres);
        }
        // t + c for the first c making the norm c² − u a nonresidue
        (0..self.p)
            .map(|c| Fqe { a: c as u32, b: 1 })
            .find(|&z| self.chi(z) == -1)
            .expect("F_{p^2} has nonsquares")
    }

    pub fn elements(&self) -> impl Iterator<Item = Fqe> + '_ {
        let p = self.p as u32;
        let bmax = if self.k == 1 { 1 } else { p };
        (0..bmax).flat_map(move |b| (0..p).map(move |a| Fqe { a, b }))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fqe {
        let a = rng.gen_range(0..self.p) as u32;
        let b = if self.k == 2 { rng.gen_range(0..self.p) as u32 } else { 0 };
        Fqe { a, b }
    }

    /// Dense index in `0..q`, handy for lookup tables.
    #[inline]
    pub fn index(&self, x: Fqe) -> usize {
        x.a as usize + x.b as usize * self.p as usize
    }
}

/// F_q(√δ) for a nonsquare δ ∈ F_q, elements written a + b√δ.
#[derive(Clone, Copy, Debug)]
pub struct QuadExt {
    pub fq: Fq,
    pub delta: Fqe,
}

impl QuadExt {
    pub fn new(fq: Fq, delta: Fqe) -> Option<QuadExt> {
        (fq.chi(delta) == -1).then_some(QuadExt { fq, delta })
    }
    pub fn mul(&self, x: (Fqe, Fqe), y: (Fqe, Fqe)) -> (Fqe, Fqe) {
        let f = &self.fq;
        (
            f.add(f.mul(x.0, y.0), f.mul(self.delta, f.mul(x.1, y.1))),
            f.add(f.mul(x.0, y.1), f.mul(x.1, y.0)),
        )
    }
    pub fn pow(&self, mut x: (Fqe, Fqe), mut e: u128) -> (Fqe, Fqe) {
        let mut r = (Fqe::ONE, Fqe::ZERO);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, x);
            }
            x = self.mul(x, x);
            e >>= 1;
        }
        r
    }
    pub fn chi(&self, x: (Fqe, Fqe)) -> i32 {
        let f = &self.fq;
        f.chi(f.sub(f.sqr(x.0), f.mul(self.delta, f.sqr(x.1))))
    }
    pub fn sqrt(&self, x: (Fqe, Fqe)) -> Option<(Fqe, Fqe)> {
        if x.0.is_zero() && x.1.is_zero() {
            return Some(x);
        }
        if self.chi(x) != 1 {
            return None;
        }
        let q = self.fq.size() as u128;
        let big = q * q;
        let s = (big - 1).trailing_zeros();
        let t = (big - 1) >> s;
        let z = self
            .fq
            .elements()
            .map(|c| (c, Fqe::ONE))
            .find(|&z| self.chi(z) == -1)
            .expect("nonsquare in quadratic extension");
        let one = (Fqe::ONE, Fqe::ZERO);
        let mut m = s;
        let mut c = self.pow(z, t);
        let mut r = self.pow(x, (t + 1) / 2);
        let mut tt = self.pow(x, t);
        while tt != one {
            let mut i = 0;
            let mut w = tt;
            while w != one {
                w = self.mul(w, w);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.mul(b, b);
            }
            m = i;
            c = self.mul(b, b);
            tt = self.mul(tt, c);
            r = self.mul(r, b);
        }
        Some(r)
    }
}

pub fn least_nonresidue(p: u64) -> u64 {
    (2..p).find(|&u| jacobi_u64(u, p) == -1).unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fields() -> Vec<Fq> {
        [3u64, 5, 7, 13, 17, 29, 101]
            .iter()
            .flat_map(|&p| [Fq::prime(p).unwrap(), Fq::quadratic(p).unwrap()])
            .collect()
    }

    #[test]
    fn modulus_is_irreducible() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
            let f = Fq::quadratic(p).unwrap();
            let u = f.nonresidue();
            assert!((0..p).all(|x| x * x % p != u));
            assert!((2..u).all(|v| (0..p).any(|x| x * x % p == v)));
        }
    }

    #[test]
    fn every_element_has_an_inverse_and_sqrt_of_square() {
        for f in fields().into_iter().filter(|f| f.size() < 2000) {
            let mut squares = 0;
            for x in f.elements() {
                if x.is_zero() {
                    continue;
                }
                let xi = f.inv(x).unwrap();
                assert_eq!(f.mul(x, xi), Fqe::ONE);
                let y = f.sqr(x);
                let r = f.sqrt(y).unwrap();
                assert_eq!(f.sqr(r), y);
                if f.is_square(x) {
                    squares += 1;
                }
            }
            assert_eq!(squares, (f.size() - 1) / 2);
        }
    }

    #[test]
    fn frobenius_fixes_base_field() {
        for p in [3u64, 7, 13, 29] {
            let f = Fq::quadratic(p).unwrap();
            for x in f.elements() {
                assert_eq!(f.frobenius(x), f.pow(x, p));
                if x.b == 0 {
                    assert_eq!(f.frobenius(x), x);
                }
            }
        }
    }

    #[test]
    fn quadratic_extension_sqrt() {
        for (p, k) in [(7u64, 1u8), (13, 1), (5, 2), (11, 2)] {
            let f = Fq::new(p, k).unwrap();
            let delta = f.elements().find(|&x| f.chi(x) == -1).unwrap();
            let e = QuadExt::new(f, delta).unwrap();
            let mut squares = 0;
            for a in f.elements() {
                for b in f.elements() {
                    let x = (a, b);
                    if let Some(r) = e.sqrt(x) {
                        assert_eq!(e.mul(r, r), x);
                        squares += 1;
                    }
                }
            }
            let q = f.size();
            assert_eq!(squares, (q * q - 1) / 2 + 1);
        }
    }

    proptest! {
        #[test]
        fn field_axioms(i in 0usize..14, a in any::<u64>(), b in any::<u64>(), c in any::<u64>(),
                        a2 in any::<u64>(), b2 in any::<u64>(), c2 in any::<u64>()) {
            let f = fields()[i];
            let mk = |x: u64, y: u64| if f.k() == 1 { f.pair(x, 0) } else { f.pair(x, y) };
            let (x, y, z) = (mk(a, a2), mk(b, b2), mk(c, c2));
            prop_assert_eq!(f.add(x, y), f.add(y, x));
            prop_assert_eq!(f.mul(x, y), f.mul(y, x));
            prop_assert_eq!(f.mul(f.mul(x, y), z), f.mul(x, f.mul(y, z)));
            prop_assert_eq!(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
            prop_assert_eq!(f.add(x, f.neg(x)), Fqe::ZERO);
            prop_assert_eq!(f.sub(f.add(x, y), y), x);
            let fx = f.frobenius(x);
            let fy = f.frobenius(y);
            prop_assert_eq!(f.frobenius(f.mul(x, y)), f.mul(fx, fy));
            prop_assert_eq!(f.frobenius(f.add(x, y)), f.add(fx, fy));
        }
    }
}
