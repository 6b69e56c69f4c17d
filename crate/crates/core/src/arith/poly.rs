//! Dense polynomials over Z and Q.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::field::Fq;
use super::fpoly::{self, FPoly};
use super::Rat;

pub type ZPoly = Poly<BigInt>;
pub type QPoly = Poly<BigRational>;

pub trait Coeff:
    Clone
    + PartialEq
    + Zero
    + One
    + std::ops::Neg<Output = Self>
    + for<'a> std::ops::Add<&'a Self, Output = Self>
    + for<'a> std::ops::Sub<&'a Self, Output = Self>
    + for<'a> std::ops::Mul<&'a Self, Output = Self>
{
}

impl Coeff for BigInt {}
impl Coeff for BigRational {}

/// Little-endian coefficients; never carries a zero leading coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly<T> {
    c: Vec<T>,
}

impl<T: Coeff> Poly<T> {
    pub fn new(mut c: Vec<T>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }
    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }
    pub fn one() -> Self {
        Poly { c: vec![T::one()] }
    }
    pub fn constant(a: T) -> Self {
        Poly::new(vec![a])
    }
    pub fn x() -> Self {
        Poly { c: vec![T::zero(), T::one()] }
    }
    pub fn coeffs(&self) -> &[T] {
        &self.c
    }
    pub fn coeff(&self, i: usize) -> T {
        self.c.get(i).cloned().unwrap_or_else(T::zero)
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    /// Degree; −1 for zero.
    pub fn deg(&self) -> isize {
        self.c.len() as isize - 1
    }
    pub fn lc(&self) -> T {
        self.c.last().cloned().unwrap_or_else(T::zero)
    }
    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|i| self.coeff(i) + &o.coeff(i)).collect())
    }
    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|i| self.coeff(i) - &o.coeff(i)).collect())
    }
    pub fn neg(&self) -> Self {
        Poly { c: self.c.iter().map(|x| -x.clone()).collect() }
    }
    pub fn scale(&self, s: &T) -> Self {
        Poly::new(self.c.iter().map(|x| x.clone() * s).collect())
    }
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] = out[i + j].clone() + &(a.clone() * b);
            }
        }
        Poly::new(out)
    }
    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Poly::one(), |acc, _| acc.mul(self))
    }
    pub fn eval(&self, x: &T) -> T {
        self.c.iter().rev().fold(T::zero(), |acc, c| acc * x + c)
    }
    pub fn derivative(&self) -> Self {
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| {
                    let mut k = T::zero();
                    for _ in 0..i {
                        k = k + &T::one();
                    }
                    c.clone() * &k
                })
                .collect(),
        )
    }
    /// self(g(x)).
    pub fn compose(&self, g: &Self) -> Self {
        self.c
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, c| acc.mul(g).add(&Poly::constant(c.clone())))
    }
    /// x^n·self(1/x) for n ≥ deg.
    pub fn reverse(&self, n: usize) -> Self {
        let mut c: Vec<T> = (0..=n).map(|i| self.coeff(i)).collect();
        c.reverse();
        Poly::new(c)
    }
}

impl Poly<BigInt> {
    pub fn from_i64(c: &[i64]) -> ZPoly {
        Poly::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }
    pub fn to_q(&self) -> QPoly {
        Poly::new(self.c.iter().map(|x| BigRational::from_integer(x.clone())).collect())
    }
    pub fn content(&self) -> BigInt {
        self.c.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
    }
    pub fn eval_q(&self, x: &Rat) -> Rat {
        self.to_q().eval(x)
    }
    /// s^n·f(r/s).
    pub fn homogeneous(&self, r: &BigInt, s: &BigInt, n: usize) -> BigInt {
        let mut acc = BigInt::zero();
        let mut spow = BigInt::one();
        let mut terms: Vec<BigInt> = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            terms.push(spow.clone());
            spow *= s;
        }
        for i in (0..=n).rev() {
            acc = acc * r + self.coeff(i) * &terms[n - i];
        }
        acc
    }
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64().unwrap())
    }
    pub fn reduce(&self, f: &Fq) -> FPoly {
        fpoly::trim(self.c.iter().map(|x| f.from_bigint(x)).collect())
    }
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.c.iter().map(|x| x.to_i64()).collect()
    }
    pub fn discriminant(&self) -> BigInt {
        let q = self.to_q();
        let n = self.deg();
        let res = q.resultant(&q.derivative());
        let sign = if (n * (n - 1) / 2) % 2 == 0 { 1 } else { -1 };
        let d = res / BigRational::from_integer(self.lc()) * BigRational::from_integer(BigInt::from(sign));
        debug_assert!(d.is_integer());
        d.to_integer()
    }
    /// Number of distinct real roots.
    pub fn count_real_roots(&self) -> usize {
        self.to_q().real_root_intervals().len()
    }
    /// Distinct real roots to double precision, ascending.
    pub fn real_roots(&self) -> Vec<f64> {
        self.to_q().real_roots()
    }
}

impl Poly<BigRational> {
    pub fn from_ints(c: &[i64]) -> QPoly {
        Poly::new(c.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
    }
    pub fn divrem(&self, b: &Self) -> (Self, Self) {
        assert!(!b.is_zero(), "polynomial division by zero");
        if self.deg() < b.deg() {
            return (Poly::zero(), self.clone());
        }
        let db = b.c.len() - 1;
        let inv = BigRational::one() / b.lc();
        let mut r = self.c.clone();
        let mut q = vec![BigRational::zero(); self.c.len() - db];
        for i in (0..q.len()).rev() {
            let c = &r[i + db] * &inv;
            if !c.is_zero() {
                for (j, bj) in b.c.iter().enumerate() {
                    r[i + j] = &r[i + j] - &c * bj;
                }
            }
            q[i] = c;
        }
        r.truncate(db);
        (Poly::new(q), Poly::new(r))
    }
    pub fn rem(&self, b: &Self) -> Self {
        self.divrem(b).1
    }
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(BigRational::one() / self.lc()))
    }
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }
    /// (g, s, t) with s·self + t·o = g monic.
    pub fn xgcd(&self, o: &Self) -> (Self, Self, Self) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = BigRational::one() / r0.lc();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }
    /// Resultant by the Euclidean recurrence.
    pub fn resultant(&self, o: &Self) -> BigRational {
        if self.is_zero() || o.is_zero() {
            return BigRational::zero();
        }
        let (m, n) = (self.deg(), o.deg());
        if n == 0 {
            return o.lc().pow(m as i32);
        }
        if m < n {
            let s = if (m * n) % 2 == 0 { 1 } else { -1 };
            return o.resultant(self) * BigRational::from_integer(BigInt::from(s));
        }
        let r = self.rem(o);
        if r.is_zero() {
            return BigRational::zero();
        }
        let s = if (m * n) % 2 == 0 { 1 } else { -1 };
        BigRational::from_integer(BigInt::from(s)) * o.lc().pow((m - r.deg()) as i32) * o.resultant(&r)
    }
    /// Denominator lcm of the coefficients.
    pub fn denominator(&self) -> BigInt {
        self.c.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()))
    }
    fn sturm_sequence(&self) -> Vec<Self> {
        let sq = self.divrem(&self.gcd(&self.derivative())).0;
        let mut seq = vec![sq.clone(), sq.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1]).neg();
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        seq
    }
    fn sign_changes(seq: &[Self], x: &BigRational) -> usize {
        let signs: Vec<i32> = seq
            .iter()
            .map(|p| {
                let v = p.eval(x);
                if v.is_positive() {
                    1
                } else if v.is_negative() {
                    -1
                } else {
                    0
                }
            })
            .filter(|&s| s != 0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }
    /// Isolating intervals (a, b] with exactly one root each, ascending.
    pub fn real_root_intervals(&self) -> Vec<(BigRational, BigRational)> {
        if self.deg() < 1 {
            return Vec::new();
        }
        let seq = self.sturm_sequence();
        // Cauchy bound
        let lc = self.lc().abs();
        let bound = self
            .c
            .iter()
            .map(|c| c.abs() / &lc)
            .fold(BigRational::zero(), |m, x| if x > m { x } else { m })
            + BigRational::one();
        let mut out = Vec::new();
        let mut stack = vec![(-bound.clone(), bound)];
        while let Some((a, b)) = stack.pop() {
            let n = Self::sign_changes(&seq, &a) - Self::sign_changes(&seq, &b);
            if n == 0 {
                continue;
            }
            if n == 1 {
                out.push((a, b));
                continue;
            }
            let mid = (&a + &b) / BigRational::from_integer(BigInt::from(2));
            stack.push((a, mid.clone()));
            stack.push((mid, b));
        }
        out.sort_by(|x, y| x.0.cmp(&y.0));
        out
    }
    pub fn real_roots(&self) -> Vec<f64> {
        let sq = self.divrem(&self.gcd(&self.derivative())).0;
        let two = BigRational::from_integer(BigInt::from(2));
        self.real_root_intervals()
            .into_iter()
            .map(|(mut a, mut b)| {
                if sq.eval(&b).is_zero() {
                    return b.to_f64().unwrap();
                }
                let sb = sq.eval(&b).is_positive();
                for _ in 0..64 {
                    let m = (&a + &b) / &two;
                    let v = sq.eval(&m);
                    if v.is_zero() {
                        return m.to_f64().unwrap();
                    }
                    if v.is_positive() == sb {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                ((a + b) / &two).to_f64().unwrap()
            })
            .collect()
    }
}

impl fmt::Display for Poly<BigInt> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let a = c.abs();
            let coef = if a.is_one() && i > 0 { String::new() } else { a.to_string() };
            let mon = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            let sep = if !coef.is_empty() && !mon.is_empty() { "*" } else { "" };
            write!(f, "{sign}{coef}{sep}{mon}")?;
            first = false;
        }
        Ok(())
    }
}

impl std::str::FromStr for Poly<BigInt> {
    type Err = crate::Error;

    /// Parses integer polynomials in `x` such as `x*(x^2 + 1) - 3x + 2`.
    fn from_str(s: &str) -> crate::Result<ZPoly> {
        let toks: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let p = parse_expr(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(crate::Error::Parse(format!("trailing input in {s:?} at {pos}")));
        }
        Ok(p)
    }
}

fn parse_expr(t: &[char], pos: &mut usize) -> crate::Result<ZPoly> {
    let mut acc = ZPoly::zero();
    let mut sign = 1;
    if *pos < t.len() && (t[*pos] == '-' || t[*pos] == '+') {
        sign = if t[*pos] == '-' { -1 } else { 1 };
        *pos += 1;
    }
    loop {
        let term = parse_term(t, pos)?;
        acc = if sign < 0 { acc.sub(&term) } else { acc.add(&term) };
        match t.get(*pos) {
            Some('+') => sign = 1,
            Some('-') => sign = -1,
            _ => return Ok(acc),
        }
        *pos += 1;
    }
}

fn parse_term(t: &[char], pos: &mut usize) -> crate::Result<ZPoly> {
    let mut acc = parse_factor(t, pos)?;
    loop {
        match t.get(*pos) {
            Some('*') => {
                *pos += 1;
                acc = acc.mul(&parse_factor(t, pos)?);
            }
            Some('x') | Some('(') => acc = acc.mul(&parse_factor(t, pos)?),
            _ => return Ok(acc),
        }
    }
}

fn parse_factor(t: &[char], pos: &mut usize) -> crate::Result<ZPoly> {
    let base = match t.get(*pos) {
        Some('x') => {
            *pos += 1;
            ZPoly::x()
        }
        Some('(') => {
            *pos += 1;
            let e = parse_expr(t, pos)?;
            if t.get(*pos) != Some(&')') {
                return Err(crate::Error::Parse("unbalanced parenthesis".into()));
            }
            *pos += 1;
            e
        }
        Some(c) if c.is_ascii_digit() => {
            let start = *pos;
            while t.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
                *pos += 1;
            }
            let s: String = t[start..*pos].iter().collect();
            ZPoly::constant(s.parse::<BigInt>().map_err(|e| crate::Error::Parse(e.to_string()))?)
        }
        other => return Err(crate::Error::Parse(format!("unexpected {other:?} at {pos}"))),
    };
    if t.get(*pos) == Some(&'^') {
        *pos += 1;
        let start = *pos;
        while t.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
            *pos += 1;
        }
        let s: String = t[start..*pos].iter().collect();
        let e: u32 = s.parse().map_err(|_| crate::Error::Parse(format!("bad exponent {s:?}")))?;
        return Ok(base.pow(e));
    }
    Ok(base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn discriminants() {
        let x13 = ZPoly::from_i64(&[1, -4, 6, -2, 1, -2, 1]);
        assert_eq!(x13.discriminant(), BigInt::from(-(1i64 << 12) * 169));
        let x18 = ZPoly::from_i64(&[1, 4, 10, 10, 5, 2, 1]);
        assert_eq!(x18.discriminant(), BigInt::from(-(1i64 << 15) * 81));
        let x16 = ZPoly::from_i64(&[0, -1, 2, 0, 2, 1]);
        assert_eq!(x16.discriminant(), BigInt::from(-(1i64 << 11)));
        assert_eq!(ZPoly::from_i64(&[-4, 0, 1]).discriminant(), BigInt::from(16));
    }

    #[test]
    fn real_roots_x16() {
        let f = ZPoly::from_i64(&[0, -1, 2, 0, 2, 1]);
        let r = f.real_roots();
        let want = [-1.0 - 2f64.sqrt(), 0.0, 2f64.sqrt() - 1.0];
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(ZPoly::from_i64(&[1, -4, 6, -2, 1, -2, 1]).count_real_roots(), 0);
    }

    #[test]
    fn homogeneous_matches_eval() {
        let f = ZPoly::from_i64(&[0, -1, 2, 0, 2, 1]);
        let (r, s) = (BigInt::from(1681), BigInt::from(882));
        let h = f.homogeneous(&r, &s, 6);
        let x = Rat::new(r, s.clone());
        assert_eq!(Rat::from_integer(h), f.eval_q(&x) * Rat::from_integer(s.pow(6)));
    }

    #[test]
    fn parse_roundtrip() {
        let f: ZPoly = "x*(x^2 + 1)*(x^2 + 2*x - 1)".parse().unwrap();
        assert_eq!(f, ZPoly::from_i64(&[0, -1, 2, 0, 2, 1]));
        let g: ZPoly = "x^6 - 2x^5 + x^4 - 2*x^3 + 6*x^2 - 4*x + 1".parse().unwrap();
        assert_eq!(g, ZPoly::from_i64(&[1, -4, 6, -2, 1, -2, 1]));
        assert_eq!(g.to_string().parse::<ZPoly>().unwrap(), g);
        assert!("x^".parse::<ZPoly>().is_err());
        assert!("(x+1".parse::<ZPoly>().is_err());
    }

    #[test]
    fn xgcd_over_q() {
        let a = QPoly::from_ints(&[1, -4, 6, -2, 1, -2, 1]);
        let b = QPoly::from_ints(&[1, 0, 1]);
        let (g, s, t) = a.xgcd(&b);
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
        assert_eq!(g, QPoly::one());
    }
}
