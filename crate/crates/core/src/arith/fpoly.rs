//! Dense polynomials over F_q, little-endian coefficient vectors.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::field::{Fq, Fqe};

pub type FPoly = Vec<Fqe>;

pub fn trim(mut a: FPoly) -> FPoly {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

/// Degree, with −1 for the zero polynomial.
#[inline]
pub fn deg(a: &[Fqe]) -> isize {
    a.len() as isize - 1
}

pub fn lc(a: &[Fqe]) -> Fqe {
    a.last().copied().unwrap_or(Fqe::ZERO)
}

pub fn constant(c: Fqe) -> FPoly {
    trim(vec![c])
}

pub fn x_minus(f: &Fq, r: Fqe) -> FPoly {
    vec![f.neg(r), Fqe::ONE]
}

pub fn from_i64(f: &Fq, c: &[i64]) -> FPoly {
    trim(c.iter().map(|&x| f.from_i64(x)).collect())
}

pub fn add(f: &Fq, a: &[Fqe], b: &[Fqe]) -> FPoly {
    let n = a.len().max(b.len());
    let z = Fqe::ZERO;
    trim((0..n)
        .map(|i| f.add(*a.get(i).unwrap_or(&z), *b.get(i).unwrap_or(&z)))
        .collect())
}

pub fn sub(f: &Fq, a: &[Fqe], b: &[Fqe]) -> FPoly {
    let n = a.len().max(b.len());
    let z = Fqe::ZERO;
    trim((0..n)
        .map(|i| f.sub(*a.get(i).unwrap_or(&z), *b.get(i).unwrap_or(&z)))
        .collect())
}

pub fn neg(f: &Fq, a: &[Fqe]) -> FPoly {
    a.iter().map(|&c| f.neg(c)).collect()
}

pub fn scale(f: &Fq, a: &[Fqe], s: Fqe) -> FPoly {
    trim(a.iter().map(|&c| f.mul(c, s)).collect())
}

pub fn mul(f: &Fq, a: &[Fqe], b: &[Fqe]) -> FPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Fqe::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    trim(out)
}

pub fn sqr(f: &Fq, a: &[Fqe]) -> FPoly {
    mul(f, a, a)
}

/// Quotient and remainder; panics on division by zero.
pub fn divrem(f: &Fq, a: &[Fqe], b: &[Fqe]) -> (FPoly, FPoly) {
    assert!(!b.is_empty(), "polynomial division by zero");
    if a.len() < b.len() {
        return (Vec::new(), a.to_vec());
    }
    let inv = f.inv(lc(b)).unwrap();
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![Fqe::ZERO; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = f.mul(r[i + db], inv);
        q[i] = c;
        if c.is_zero() {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            r[i + j] = f.sub(r[i + j], f.mul(c, bj));
        }
    }
    r.truncate(db);
    (trim(q), trim(r))
}

pub fn rem(f: &Fq, a: &[Fqe], b: &[Fqe]) -> FPoly {
    if a.len() < b.len() {
        return a.to_vec();
    }
    divrem(f, a, b).1
}

pub fn div_exact(f: &Fq, a: &[Fqe], b: &[Fqe]) -> FPoly {
    let (q, r) = divrem(f, a, b);
    debug_assert!(r.is_empty(), "inexact polynomial division");
    q
}

pub fn monic(f: &Fq, a: &[Fqe]) -> FPoly {
    if a.is_empty() {
        return Vec::new();
    }
    let inv = f.inv(lc(a)).unwrap();
    scale(f, a, inv)
}

pub fn gcd(f: &Fq, a: &[Fqe], b: &[Fqe]) -> FPoly {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    while !y.is_empty() {
        let r = rem(f, &x, &y);
        x = y;
        y = r;
    }
    monic(f, &x)
}

/// Returns (g, s, t) with s·a + t·b = g and g monic.
pub fn xgcd(f: &Fq, a: &[Fqe], b: &[Fqe]) -> (FPoly, FPoly, FPoly) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    let (mut s0, mut s1) = (vec![Fqe::ONE], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![Fqe::ONE]);
    while !r1.is_empty() {
        let (q, r) = divrem(f, &r0, &r1);
        let s = sub(f, &s0, &mul(f, &q, &s1));
        let t = sub(f, &t0, &mul(f, &q, &t1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
        t0 = std::mem::replace(&mut t1, t);
    }
    if r0.is_empty() {
        return (r0, s0, t0);
    }
    let inv = f.inv(lc(&r0)).unwrap();
    (scale(f, &r0, inv), scale(f, &s0, inv), scale(f, &t0, inv))
}

pub fn eval(f: &Fq, a: &[Fqe], x: Fqe) -> Fqe {
    a.iter().rev().fold(Fqe::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
}

pub fn derivative(f: &Fq, a: &[Fqe]) -> FPoly {
    trim(a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| f.mul(c, f.from_u64(i as u64)))
        .collect())
}

pub fn mulmod(f: &Fq, a: &[Fqe], b: &[Fqe], m: &[Fqe]) -> FPoly {
    rem(f, &mul(f, a, b), m)
}

pub fn powmod(f: &Fq, a: &[Fqe], mut e: u128, m: &[Fqe]) -> FPoly {
    let mut r = rem(f, &[Fqe::ONE], m);
    let mut b = rem(f, a, m);
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(f, &r, &b, m);
        }
        b = mulmod(f, &b, &b, m);
        e >>= 1;
    }
    r
}

fn qpow(f: &Fq, d: usize) -> u128 {
    (f.size() as u128)
        .checked_pow(d as u32)
        .expect("field too large for equal-degree splitting")
}

/// Distinct roots in F_q.
pub fn roots(f: &Fq, a: &[Fqe]) -> Vec<Fqe> {
    let a = monic(f, &trim(a.to_vec()));
    if a.len() <= 1 {
        return Vec::new();
    }
    let x = vec![Fqe::ZERO, Fqe::ONE];
    let xq = powmod(f, &x, f.size() as u128, &a);
    let g = gcd(f, &a, &sub(f, &xq, &x));
    let mut out: Vec<Fqe> = split_equal_degree(f, &g, 1)
        .into_iter()
        .map(|l| f.neg(l[0]))
        .collect();
    out.sort();
    out
}

/// Splits a monic squarefree product of degree-d irreducibles.
fn split_equal_degree(f: &Fq, g: &[Fqe], d: usize) -> Vec<FPoly> {
    let n = deg(g) as usize;
    if n == 0 {
        return Vec::new();
    }
    if n == d {
        return vec![g.to_vec()];
    }
    let seed = g.iter().fold(0u64, |h, c| h.wrapping_mul(1_000_003) ^ (c.a as u64) ^ ((c.b as u64) << 32));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = (qpow(f, d) - 1) / 2;
    loop {
        let r: FPoly = trim((0..n).map(|_| f.random(&mut rng)).collect());
        if deg(&r) < 1 {
            continue;
        }
        let h = sub(f, &powmod(f, &r, e, g), &[Fqe::ONE]);
        let h = gcd(f, g, &h);
        if deg(&h) > 0 && deg(&h) < n as isize {
            let mut out = split_equal_degree(f, &h, d);
            out.extend(split_equal_degree(f, &div_exact(f, g, &h), d));
            return out;
        }
    }
}

/// p-th root of a polynomial whose exponents are all multiples of p.
fn pth_root(f: &Fq, a: &[Fqe]) -> FPoly {
    let p = f.p() as usize;
    let e = f.size() / f.p();
    trim(a.iter().step_by(p).map(|&c| f.pow(c, e)).collect())
}

/// Squarefree decomposition: pairs (g, i) with a = lc·∏ g^i.
pub fn squarefree_decomposition(f: &Fq, a: &[Fqe]) -> Vec<(FPoly, u32)> {
    let a = monic(f, a);
    let mut out = Vec::new();
    if deg(&a) < 1 {
        return out;
    }
    let c0 = gcd(f, &a, &derivative(f, &a));
    let mut w = div_exact(f, &a, &c0);
    let mut c = c0;
    let mut i = 1;
    while deg(&w) > 0 {
        let y = gcd(f, &w, &c);
        let fac = div_exact(f, &w, &y);
        if deg(&fac) > 0 {
            out.push((fac, i));
        }
        c = div_exact(f, &c, &y);
        w = y;
        i += 1;
    }
    if deg(&c) > 0 {
        let p = f.p() as u32;
        for (g, e) in squarefree_decomposition(f, &pth_root(f, &c)) {
            out.push((g, e * p));
        }
    }
    out
}

/// Monic irreducible factors with multiplicity, sorted by (degree, coefficients).
pub fn factor(f: &Fq, a: &[Fqe]) -> Vec<(FPoly, u32)> {
    let mut out = Vec::new();
    for (g, e) in squarefree_decomposition(f, a) {
        let x = vec![Fqe::ZERO, Fqe::ONE];
        let mut rest = g;
        let mut h = x.clone();
        let mut d = 1;
        while deg(&rest) >= 2 * d as isize {
            h = powmod(f, &h, f.size() as u128, &rest);
            let gd = gcd(f, &rest, &sub(f, &h, &x));
            if deg(&gd) > 0 {
                for q in split_equal_degree(f, &gd, d) {
                    out.push((q, e));
                }
                rest = div_exact(f, &rest, &gd);
                h = rem(f, &h, &rest);
            }
            d += 1;
        }
        if deg(&rest) > 0 {
            out.push((rest, e));
        }
    }
    out.sort_by(|x, y| (x.0.len(), &x.0).cmp(&(y.0.len(), &y.0)));
    out
}

pub fn random_monic<R: Rng + ?Sized>(f: &Fq, d: usize, rng: &mut R) -> FPoly {
    let mut v: FPoly = (0..d).map(|_| f.random(rng)).collect();
    v.push(Fqe::ONE);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn expand(f: &Fq, fac: &[(FPoly, u32)]) -> FPoly {
        let mut acc = vec![Fqe::ONE];
        for (g, e) in fac {
            for _ in 0..*e {
                acc = mul(f, &acc, g);
            }
        }
        acc
    }

    #[test]
    fn x2_plus_1() {
        let f5 = Fq::prime(5).unwrap();
        let r = roots(&f5, &from_i64(&f5, &[1, 0, 1]));
        assert_eq!(r, vec![f5.from_u64(2), f5.from_u64(3)]);
        let f3 = Fq::prime(3).unwrap();
        let g = from_i64(&f3, &[1, 0, 1]);
        assert!(roots(&f3, &g).is_empty());
        let fac = factor(&f3, &g);
        assert_eq!(fac, vec![(g, 1)]);
    }

    #[test]
    fn x1_13_sextic_mod_5() {
        let f5 = Fq::prime(5).unwrap();
        let s = from_i64(&f5, &[1, -4, 6, -2, 1, -2, 1]);
        let fac = factor(&f5, &s);
        assert_eq!(expand(&f5, &fac), s);
        for (g, _) in &fac {
            if deg(g) > 1 {
                assert!(roots(&f5, g).is_empty());
            }
        }
    }

    #[test]
    fn inseparable_input() {
        // (x^3 + 2)^3 · (x + 1)^2 over F_3 has zero-derivative pieces
        let f = Fq::prime(3).unwrap();
        let base = from_i64(&f, &[2, 0, 0, 1]);
        let mut a = mul(&f, &base, &mul(&f, &base, &base));
        a = mul(&f, &a, &from_i64(&f, &[1, 2, 1]));
        let fac = factor(&f, &a);
        assert_eq!(expand(&f, &fac), a);
    }

    proptest! {
        #[test]
        fn factor_roundtrip(pi in 0usize..5, k in 1u8..3, c in proptest::collection::vec(0u64..1000, 2..9)) {
            let p = [3u64, 5, 7, 11, 13][pi];
            let f = Fq::new(p, k).unwrap();
            let mut a: FPoly = c.iter().map(|&x| f.pair(x, if k == 2 { x / 7 } else { 0 })).collect();
            a.push(Fqe::ONE);
            let a = trim(a);
            let fac = factor(&f, &a);
            prop_assert_eq!(expand(&f, &fac), a.clone());
            let rs = roots(&f, &a);
            let brute: Vec<Fqe> = {
                let mut v: Vec<Fqe> = f.elements().filter(|&x| eval(&f, &a, x).is_zero()).collect();
                v.sort();
                v
            };
            prop_assert_eq!(rs, brute);
        }

        #[test]
        fn xgcd_identity(c1 in proptest::collection::vec(0u64..13, 1..7), c2 in proptest::collection::vec(0u64..13, 1..7)) {
            let f = Fq::prime(13).unwrap();
            let a = trim(c1.iter().map(|&x| f.from_u64(x)).collect());
            let b = trim(c2.iter().map(|&x| f.from_u64(x)).collect());
            prop_assume!(!a.is_empty() || !b.is_empty());
            let (g, s, t) = xgcd(&f, &a, &b);
            prop_assert_eq!(add(&f, &mul(&f, &s, &a), &mul(&f, &t, &b)), g.clone());
            prop_assert_eq!(g, gcd(&f, &a, &b));
        }
    }
}
