//! Divisors over Q and their reductions.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{Jacobian, MumfordDivisor};
use crate::arith::{fpoly::FPoly, Fq, QPoly, Rat};
use crate::curve::TwistedCurve;
use crate::error::{Error, Result};

/// Effective Q-rational pair (A, B): A monic, deg B < deg A, B² ≡ h (mod A).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveDivisor {
    pub a: QPoly,
    pub b: QPoly,
}

/// The class [Σ plus − Σ minus]; both sides of equal degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalDivisor {
    pub plus: Vec<EffectiveDivisor>,
    pub minus: Vec<EffectiveDivisor>,
}

impl EffectiveDivisor {
    pub fn new(a: QPoly, b: QPoly, h: &QPoly) -> Result<EffectiveDivisor> {
        if a.deg() < 0 || !a.lc().is_one() {
            return Err(Error::Invalid("A must be monic".into()));
        }
        let b = b.rem(&a);
        if !b.mul(&b).sub(h).rem(&a).is_zero() {
            return Err(Error::Invalid("B² ≢ h (mod A)".into()));
        }
        Ok(EffectiveDivisor { a, b })
    }

    pub fn degree(&self) -> usize {
        self.a.deg().max(0) as usize
    }

    /// The image under the hyperelliptic involution.
    pub fn opposite(&self) -> EffectiveDivisor {
        EffectiveDivisor { a: self.a.clone(), b: self.b.neg() }
    }

    /// k·P for an affine point with y ≠ 0: A = (x − x₀)^k, B the k-jet of √h.
    pub fn point_multiple(x0: &Rat, y0: &Rat, k: usize, h: &QPoly) -> Result<EffectiveDivisor> {
        if y0.is_zero() {
            return Err(Error::Invalid("k·P with y = 0 is not semi-reduced".into()));
        }
        if &(y0 * y0) != &h.eval(x0) {
            return Err(Error::Invalid("point not on the curve".into()));
        }
        let shift = QPoly::new(vec![x0.clone(), Rat::one()]);
        let c = h.compose(&shift);
        let mut s: Vec<Rat> = vec![y0.clone()];
        let two_s0 = y0 * Rat::from_integer(2.into());
        for n in 1..k {
            let mut acc = c.coeff(n);
            for i in 1..n {
                acc -= &s[i] * &s[n - i];
            }
            s.push(acc / &two_s0);
        }
        let back = QPoly::new(vec![-x0.clone(), Rat::one()]);
        let a = back.pow(k as u32);
        let b = QPoly::new(s).compose(&back);
        EffectiveDivisor::new(a, b, h)
    }

    /// lcm of all coefficient denominators.
    pub fn denominator(&self) -> BigInt {
        self.a.denominator().lcm(&self.b.denominator())
    }

    /// Coefficientwise reduction into F_q.
    pub fn reduce(&self, fq: &Fq) -> Result<(FPoly, FPoly)> {
        let den = self.denominator();
        let p = BigInt::from(fq.p());
        if den.is_multiple_of(&p) {
            return Err(Error::Inadmissible { p: fq.p(), den });
        }
        Ok((reduce_qpoly(&self.a, fq), reduce_qpoly(&self.b, fq)))
    }
}

pub fn reduce_qpoly(q: &QPoly, fq: &Fq) -> FPoly {
    let c = q
        .coeffs()
        .iter()
        .map(|r| fq.div(fq.from_bigint(r.numer()), fq.from_bigint(r.denom())).expect("admissible"))
        .collect();
    crate::arith::fpoly::trim(c)
}

impl GlobalDivisor {
    pub fn zero() -> GlobalDivisor {
        GlobalDivisor { plus: Vec::new(), minus: Vec::new() }
    }

    pub fn new(plus: Vec<EffectiveDivisor>, minus: Vec<EffectiveDivisor>) -> Result<GlobalDivisor> {
        let dp: usize = plus.iter().map(EffectiveDivisor::degree).sum();
        let dm: usize = minus.iter().map(EffectiveDivisor::degree).sum();
        if dp != dm {
            return Err(Error::Invalid(format!("unbalanced divisor: degrees {dp} and {dm}")));
        }
        Ok(GlobalDivisor { plus, minus })
    }

    pub fn negate(&self) -> GlobalDivisor {
        GlobalDivisor { plus: self.minus.clone(), minus: self.plus.clone() }
    }

    pub fn denominator(&self) -> BigInt {
        self.plus.iter().chain(&self.minus).fold(BigInt::one(), |acc, e| acc.lcm(&e.denominator()))
    }

    /// The class mod p as the class of D + ιE, using E + ιE ~ deg E·D∞.
    pub fn reduce(&self, jac: &Jacobian) -> Result<MumfordDivisor> {
        let mut parts = Vec::new();
        for e in &self.plus {
            parts.push(e.reduce(&jac.fq)?);
        }
        for e in &self.minus {
            parts.push(e.opposite().reduce(&jac.fq)?);
        }
        jac.class_of_sum(&parts, 0, 0)
    }
}

/// Reduction of a global class at a good prime.
pub fn reduce_global(c: &TwistedCurve, d: &GlobalDivisor, p: u64) -> Result<(Jacobian, MumfordDivisor)> {
    let jac = Jacobian::new(c, p, 1)?;
    let m = d.reduce(&jac)?;
    Ok((jac, m))
}

fn rat_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// All complex roots of a squarefree polynomial by Durand–Kerner.
pub fn complex_roots(q: &QPoly) -> Vec<Complex64> {
    let n = q.deg().max(0) as usize;
    if n == 0 {
        return Vec::new();
    }
    let lc = rat_f64(&q.lc());
    let c: Vec<Complex64> = q.coeffs().iter().map(|r| Complex64::new(rat_f64(r) / lc, 0.0)).collect();
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a);
    let bound = 1.0 + c[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32) * bound).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    z
}

/// Nearest fraction with denominator ≤ qmax, if within a relative 1e-8.
pub fn rational_approx(x: f64, qmax: i64) -> Option<Rat> {
    if !x.is_finite() || x.abs() > 1e15 {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > qmax as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let err = (x - h1 as f64 / k1 as f64).abs();
        if err <= 1e-8 * x.abs().max(1.0) {
            return Some(Rat::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = r - a;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

fn poly_from_complex(c: &[Complex64], qmax: i64) -> Option<QPoly> {
    let mut out = Vec::new();
    for z in c {
        if z.im.abs() > 1e-6 * z.re.abs().max(1.0) {
            return None;
        }
        out.push(rational_approx(z.re, qmax)?);
    }
    Some(QPoly::new(out))
}

/// Monic product of the linear factors at the given roots.
fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, a) in c.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * r;
        }
        c = next;
    }
    c
}

/// A B with B² ≡ h (mod A) over Q, for squarefree A of degree ≤ 3.
pub fn sqrt_mod(a: &QPoly, h: &QPoly, qmax: i64) -> Option<QPoly> {
    let roots = complex_roots(a);
    let n = roots.len();
    let hc: Vec<Complex64> = h.coeffs().iter().map(|r| Complex64::new(rat_f64(r), 0.0)).collect();
    let heval = |z: Complex64| hc.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
    let sq: Vec<Complex64> = roots.iter().map(|&z| heval(z).sqrt()).collect();
    for signs in 0..(1u32 << n) {
        let vals: Vec<Complex64> =
            (0..n).map(|i| if signs >> i & 1 == 1 { -sq[i] } else { sq[i] }).collect();
        // Lagrange interpolation
        let mut coef = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let others: Vec<Complex64> = (0..n).filter(|&j| j != i).map(|j| roots[j]).collect();
            let basis = from_roots(&others);
            let den: Complex64 = others.iter().map(|r| roots[i] - r).product();
            for (k, b) in basis.iter().enumerate() {
                coef[k] += vals[i] * b / den;
            }
        }
        if let Some(b) = poly_from_complex(&coef, qmax) {
            if b.mul(&b).sub(h).rem(a).is_zero() {
                return Some(b);
            }
        }
    }
    None
}

/// Monic rational cubic factors of a squarefree sextic.
pub fn cubic_factors(g: &QPoly, qmax: i64) -> Vec<QPoly> {
    let roots = complex_roots(g);
    let n = roots.len();
    let mut out: Vec<QPoly> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let c = from_roots(&[roots[i], roots[j], roots[k]]);
                if let Some(a) = poly_from_complex(&c, qmax) {
                    if g.rem(&a).is_zero() && !out.contains(&a) {
                        out.push(a);
                    }
                }
            }
        }
    }
    out
}

fn is_rational_square(r: &Rat) -> bool {
    if r.is_negative() {
        return false;
    }
    let sq = |n: &BigInt| {
        let s = n.sqrt();
        &s * &s == *n
    };
    sq(r.numer()) && sq(r.denom())
}

fn fractions(height: i64) -> Vec<Rat> {
    let mut out = Vec::new();
    for s in 1..=height {
        for r in -height..=height {
            if r.gcd(&s) == 1 {
                out.push(Rat::new(BigInt::from(r), BigInt::from(s)));
            }
        }
    }
    out
}

/// An effective Q-rational divisor of degree 3, by bounded search:
/// 3P for small rational points, monic integral cubics, then the pencil
/// B = d·t·q(x) when the curve carries one.
pub fn find_degree3_divisor(c: &TwistedCurve, height_bound: i64) -> Result<Option<EffectiveDivisor>> {
    if c.genus() != 2 {
        return Err(Error::Invalid("degree-3 divisors are searched on genus-2 curves".into()));
    }
    if height_bound <= 0 {
        return Ok(None);
    }
    let h = c.h.to_q();
    for x in fractions(height_bound) {
        let v = h.eval(&x);
        if !v.is_zero() && is_rational_square(&v) {
            let y = Rat::new(v.numer().sqrt(), v.denom().sqrt());
            return EffectiveDivisor::point_multiple(&x, &y, 3, &h).map(Some);
        }
    }
    if let Some(e) = search_pencil(c, height_bound)? {
        return Ok(Some(e));
    }
    let hb = height_bound.min(12);
    let qmax = 10_000;
    for a2 in -hb..=hb {
        for a1 in -hb..=hb {
            for a0 in -hb..=hb {
                let a = QPoly::from_ints(&[a0, a1, a2, 1]);
                let res = a.resultant(&h);
                if res.is_zero() || !is_rational_square(&res) {
                    continue;
                }
                if a.gcd(&a.derivative()).deg() > 0 {
                    continue;
                }
                if let Some(b) = sqrt_mod(&a, &h, qmax) {
                    return EffectiveDivisor::new(a, b, &h).map(Some);
                }
            }
        }
    }
    Ok(None)
}

/// B = d·t·q(x) with h − B² = d·A·A′ for a pencil quadratic q.
fn search_pencil(c: &TwistedCurve, height_bound: i64) -> Result<Option<EffectiveDivisor>> {
    let Some(q) = &c.base.pencil else { return Ok(None) };
    let h = c.h.to_q();
    let d = Rat::from_integer(BigInt::from(c.d));
    let q = q.to_q();
    let q2 = q.mul(&q);
    let f = c.base.f.to_q();
    for t in fractions(height_bound) {
        if t.is_zero() {
            continue;
        }
        let lam = &d * &t * &t;
        let g = f.sub(&q2.scale(&lam));
        if g.deg() != 6 || g.gcd(&g.derivative()).deg() > 0 {
            continue;
        }
        let gm = g.monic();
        for a in cubic_factors(&gm, 1 << 40) {
            let b = q.scale(&(&d * &t));
            if let Ok(e) = EffectiveDivisor::new(a, b, &h) {
                return Ok(Some(e));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{twist, CurveModel};

    fn q(c: &[(i64, i64)]) -> QPoly {
        QPoly::new(c.iter().map(|&(n, d)| Rat::new(n.into(), d.into())).collect())
    }

    #[test]
    fn point_multiple_is_valid() {
        let c = twist(&CurveModel::x1_13(), 1).unwrap();
        let h = c.h.to_q();
        let e = EffectiveDivisor::point_multiple(&Rat::zero(), &Rat::one(), 3, &h).unwrap();
        assert_eq!(e.degree(), 3);
        assert_eq!(e.a, QPoly::from_ints(&[0, 0, 0, 1]));
    }

    #[test]
    fn known_cubic_divisors_on_673() {
        let c = twist(&CurveModel::x1_13(), 673).unwrap();
        let h = c.h.to_q();
        let b = q(&[(0, 1), (-673, 6), (673, 6)]);
        let a = q(&[(1, 1), (-35, 6), (17, 6), (1, 1)]);
        assert!(EffectiveDivisor::new(a, b.clone(), &h).is_ok());
        let a2 = q(&[(1, 1), (11, 6), (-29, 6), (1, 1)]);
        assert!(EffectiveDivisor::new(a2, b, &h).is_ok());
    }

    #[test]
    fn search_finds_degree3_divisors() {
        let c = twist(&CurveModel::x1_13(), 17).unwrap();
        let e = find_degree3_divisor(&c, 30).unwrap().expect("divisor on the 17-twist");
        assert_eq!(e.degree(), 3);
        let c = twist(&CurveModel::x1_13(), 673).unwrap();
        let e = find_degree3_divisor(&c, 8).unwrap().expect("divisor on the 673-twist");
        assert!(EffectiveDivisor::new(e.a.clone(), e.b.clone(), &c.h.to_q()).is_ok());
        assert_eq!(find_degree3_divisor(&c, 0).unwrap(), None);
    }

    #[test]
    fn sqrt_mod_recovers_b() {
        let h = QPoly::from_ints(&[1, -4, 6, -2, 1, -2, 1]);
        let a = QPoly::from_ints(&[-1, 0, 0, 1]).sub(&QPoly::from_ints(&[0, 2])).monic();
        let b = QPoly::from_ints(&[3, -1, 2]);
        // h′ = b² + a·k is a curve through (a, b) by construction
        let h2 = b.mul(&b).add(&a.mul(&h.rem(&a).add(&QPoly::from_ints(&[0, 0, 0, 1]))));
        let got = sqrt_mod(&a, &h2, 1000).unwrap();
        assert!(got.mul(&got).sub(&h2).rem(&a).is_zero());
    }

    #[test]
    fn reduction_commutes_with_multiples() {
        let c = twist(&CurveModel::x1_13(), 17).unwrap();
        let h = c.h.to_q();
        let e = find_degree3_divisor(&c, 30).unwrap().unwrap();
        let pt = {
            let (x, y) = (e.a.coeff(2).clone() * Rat::from_integer((-1).into()) / Rat::from_integer(3.into()), e.b.eval(&(-e.a.coeff(2).clone() / Rat::from_integer(3.into()))));
            (x, y)
        };
        let p1 = EffectiveDivisor::point_multiple(&pt.0, &pt.1, 1, &h).unwrap();
        let p3 = EffectiveDivisor::point_multiple(&pt.0, &pt.1, 3, &h).unwrap();
        let d1 = GlobalDivisor::new(vec![p1.clone(), p1.clone(), p1.clone()], vec![p3.clone()]).unwrap();
        for p in [5u64, 7, 11, 19, 23] {
            let Ok(jac) = Jacobian::new(&c, p, 1) else { continue };
            if d1.denominator().is_multiple_of(&BigInt::from(p)) {
                continue;
            }
            assert_eq!(d1.reduce(&jac).unwrap(), jac.identity(), "p = {p}");
            let one = GlobalDivisor::new(vec![p1.clone(), p1.clone()], vec![p1.opposite(), p1.opposite()]).unwrap();
            let r = one.reduce(&jac).unwrap();
            let base = GlobalDivisor::new(vec![p1.clone()], vec![p1.opposite()]).unwrap().reduce(&jac).unwrap();
            assert_eq!(r, jac.double(&base));
            for m in 1..=20i64 {
                let plus = vec![p1.clone(); m as usize];
                let minus = vec![p1.opposite(); m as usize];
                let g = GlobalDivisor::new(plus, minus).unwrap().reduce(&jac).unwrap();
                assert_eq!(g, jac.mul(&base, m));
            }
            assert_eq!(GlobalDivisor::zero().reduce(&jac).unwrap(), jac.identity());
        }
    }
}
