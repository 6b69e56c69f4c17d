//! Elementary number theory on machine words and big integers.

use num_bigint::{BigInt, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[inline]
pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

/// Modular inverse of `a` mod `m`, if it exists.
pub fn invmod(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest-prime-factor table on `0..=n`.
pub fn spf_table(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

fn pollard_brent_u64(n: u64, seed: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    let c = seed % (n - 1) + 1;
    let f = |x: u64| (mulmod(x, x, n) + c) % n;
    let (mut y, m) = (seed % n, 128u64);
    let (mut g, mut r, mut q) = (1u64, 1u64, 1u64);
    let (mut x, mut ys) = (0u64, 0u64);
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mulmod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += m;
        }
        r *= 2;
        if r > 1 << 24 {
            return None;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    if g == n {
        None
    } else {
        Some(g)
    }
}

/// Full factorization of a machine word, ascending primes.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    if n <= 1 {
        return out;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut stack = vec![n];
    let mut primes = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            primes.push(m);
            continue;
        }
        let r = m.sqrt();
        if r * r == m {
            stack.push(r);
            stack.push(r);
            continue;
        }
        let mut seed = 2;
        let d = loop {
            if let Some(d) = pollard_brent_u64(m, seed) {
                break d;
            }
            seed += 1;
        };
        stack.push(d);
        stack.push(m / d);
    }
    primes.sort_unstable();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

pub fn is_square_u128(n: u128) -> Option<u128> {
    let r = n.sqrt();
    (r * r == n).then_some(r)
}

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi_u64(mut a: u64, mut n: u64) -> i32 {
    debug_assert!(n % 2 == 1);
    a %= n;
    let mut t = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol on machine integers.
pub fn kronecker_i64(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut t = 1;
    let mut m = n.unsigned_abs();
    if n < 0 && a < 0 {
        t = -t;
    }
    let tz = m.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            t = -t;
        }
        m >>= tz;
    }
    // (a/m) for odd m > 0, a possibly negative
    let ar = a.rem_euclid(m as i64) as u64;
    t * jacobi_u64(ar, m)
}

/// Kronecker symbol (a/n) for arbitrary integers.
pub fn kronecker(a: &BigInt, n: &BigInt) -> i32 {
    if let (Some(a), Some(n)) = (a.to_i64(), n.to_i64()) {
        return kronecker_i64(a, n);
    }
    if n.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    let mut t = 1;
    if n.is_negative() && a.is_negative() {
        t = -t;
    }
    let mut m = n.abs();
    let tz = m.trailing_zeros().unwrap_or(0);
    if tz > 0 {
        if a.is_even() {
            return 0;
        }
        let a8 = a.mod_floor(&BigInt::from(8)).to_u8().unwrap();
        if tz % 2 == 1 && matches!(a8, 3 | 5) {
            t = -t;
        }
        m >>= tz;
    }
    let mut x = a.mod_floor(&m);
    let mut y = m;
    while !x.is_zero() {
        let z = x.trailing_zeros().unwrap_or(0);
        x >>= z;
        let y8 = (&y % 8u32).to_u8().unwrap();
        if z % 2 == 1 && (y8 == 3 || y8 == 5) {
            t = -t;
        }
        if (&x % 4u32).to_u8() == Some(3) && (&y % 4u32).to_u8() == Some(3) {
            t = -t;
        }
        std::mem::swap(&mut x, &mut y);
        x = x.mod_floor(&y);
    }
    if y.is_one() {
        t
    } else {
        0
    }
}

fn small_primes() -> &'static [u64] {
    use std::sync::OnceLock;
    static P: OnceLock<Vec<u64>> = OnceLock::new();
    P.get_or_init(|| primes_up_to(100_000))
}

const MR_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Miller-Rabin on the first 13 prime bases: deterministic below 3.3e24.
pub fn is_probable_prime(n: &BigInt) -> bool {
    if let Some(m) = n.to_u64() {
        return is_prime_u64(m);
    }
    if n.is_negative() || n.is_even() {
        return false;
    }
    let nm1: BigInt = n - 1u32;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'outer: for a in MR_BASES {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn brent_big(n: &BigInt, c: u64, budget: u64) -> Option<BigInt> {
    let c = BigInt::from(c);
    let f = |x: &BigInt| (x * x + &c) % n;
    let mut y = BigInt::from(2);
    let (mut r, m) = (1u64, 64u64);
    let mut q = BigInt::one();
    let mut g = BigInt::one();
    let mut x = BigInt::zero();
    let mut ys = BigInt::zero();
    let mut spent = 0u64;
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                q = (q * (&x - &y).abs()) % n;
            }
            g = q.gcd(n);
            k += m;
        }
        spent += r;
        if spent > budget {
            return None;
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = (&x - &ys).abs().gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

/// Default iteration budget for Pollard rho in [`factor`].
pub const RHO_BUDGET: u64 = 1 << 22;

/// Factor |n| completely; errors with the stubborn cofactor if rho runs out.
pub fn factor(n: &BigInt, budget: u64) -> Result<Vec<(BigInt, u32)>> {
    let mut m = n.abs();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    if m.is_zero() {
        return Err(Error::Invalid("cannot factor 0".into()));
    }
    if let Some(v) = m.to_u64() {
        return Ok(factor_u64(v)
            .into_iter()
            .map(|(p, e)| (BigInt::from(p), e))
            .collect());
    }
    for &p in small_primes() {
        let pb = BigInt::from(p);
        if &pb * &pb > m {
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = m.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            m = q;
            e += 1;
        }
        if e > 0 {
            out.push((pb, e));
        }
    }
    let mut stack = vec![m];
    let mut big = Vec::new();
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if let Some(v) = m.to_u64() {
            for (p, e) in factor_u64(v) {
                for _ in 0..e {
                    big.push(BigInt::from(p));
                }
            }
            continue;
        }
        if is_probable_prime(&m) {
            big.push(m);
            continue;
        }
        let r = m.sqrt();
        if &r * &r == m {
            stack.push(r.clone());
            stack.push(r);
            continue;
        }
        let mut found = None;
        for c in 1..4 {
            if let Some(d) = brent_big(&m, c, budget) {
                found = Some(d);
                break;
            }
        }
        match found {
            Some(d) => {
                stack.push(&m / &d);
                stack.push(d);
            }
            None => return Err(Error::Unfactored(m)),
        }
    }
    big.sort();
    for p in big {
        match out.iter_mut().find(|(q, _)| *q == p) {
            Some((_, e)) => *e += 1,
            None => out.push((p, 1)),
        }
    }
    out.sort();
    Ok(out)
}

/// Write n = d·c² with d squarefree and sign(d) = sign(n).
pub fn squarefree_part(n: &BigInt) -> Result<(BigInt, BigInt)> {
    squarefree_part_with_budget(n, RHO_BUDGET)
}

pub fn squarefree_part_with_budget(n: &BigInt, budget: u64) -> Result<(BigInt, BigInt)> {
    if n.is_zero() {
        return Err(Error::Invalid("squarefree part of 0".into()));
    }
    let mut d = BigInt::one();
    let mut c = BigInt::one();
    for (p, e) in factor(n, budget)? {
        if e % 2 == 1 {
            d *= &p;
        }
        c *= p.pow(e / 2);
    }
    if n.sign() == Sign::Minus {
        d = -d;
    }
    Ok((d, c))
}

pub fn is_squarefree_i64(n: i64) -> bool {
    n != 0 && factor_u64(n.unsigned_abs()).iter().all(|&(_, e)| e == 1)
}

pub fn is_squarefree(n: &BigInt) -> Result<bool> {
    if n.is_zero() {
        return Ok(false);
    }
    Ok(factor(n, RHO_BUDGET)?.iter().all(|(_, e)| *e == 1))
}

/// Squarefree d with 0 < |d| < bound and d ≠ 1, ascending by |d|, negative first.
pub fn squarefree_sieve(bound: i64) -> impl Iterator<Item = i64> {
    let n = bound.max(1) as usize;
    let mut sf = vec![true; n];
    let mut i = 2usize;
    while i * i < n {
        let mut j = i * i;
        while j < n {
            sf[j] = false;
            j += i * i;
        }
        i += 1;
    }
    (1..n).filter(move |&m| sf[m]).flat_map(|m| {
        let m = m as i64;
        if m == 1 {
            vec![-1]
        } else {
            vec![-m, m]
        }
    })
}

/// Fundamental discriminant of Q(√d) for squarefree d ≠ 1.
pub fn fundamental_discriminant(d: i64) -> i64 {
    if d.rem_euclid(4) == 1 {
        d
    } else {
        4 * d
    }
}
