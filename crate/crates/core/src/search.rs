//! Rational points on all twists at once, bucketed by squarefree part.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::nt::{is_square_u128, primes_up_to};
use crate::arith::{fpoly, Fq, Rat};
use crate::curve::{rat_parts, twist, CurveModel, TwistedCurve};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalPoint {
    pub d: i64,
    /// x = r/s in lowest terms, s > 0.
    pub r: i64,
    pub s: i64,
    pub y: Rat,
}

impl RationalPoint {
    pub fn x(&self) -> Rat {
        Rat::new(BigInt::from(self.r), BigInt::from(self.s))
    }
    pub fn height(&self) -> i64 {
        self.r.abs().max(self.s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointClass {
    NoncuspidalQuadratic,
    Cusp,
    Weierstrass,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchReport {
    pub label: String,
    pub height: i64,
    pub d_bound: i64,
    /// Points with y ≠ 0, keyed by twist, ordered by height.
    pub points: BTreeMap<i64, Vec<RationalPoint>>,
    /// Rational roots of f: y = 0 points present on every twist.
    pub weierstrass_x: Vec<Rat>,
}

impl SearchReport {
    /// Twists carrying a noncuspidal point with y ≠ 0.
    pub fn point_bearing(&self, c: &CurveModel) -> Vec<i64> {
        self.points
            .iter()
            .filter(|(&d, pts)| pts.iter().any(|p| classify_point(c, d, p).ok() == Some(PointClass::NoncuspidalQuadratic)))
            .map(|(&d, _)| d)
            .collect()
    }
}

/// Roots ρ of f mod p, and whether p divides the degree-6 leading coefficient.
struct SievePrime {
    p: u64,
    roots: Vec<u64>,
    lc_zero: bool,
}

fn sieve_primes(f6: &[i64; 7], bound: i64) -> Vec<SievePrime> {
    primes_up_to(bound.max(2) as u64 - 1)
        .into_iter()
        .map(|p| {
            if p == 2 {
                let roots = (0..2u64).filter(|&x| f6.iter().rev().fold(0i64, |a, c| (a * x as i64 + c).rem_euclid(2)) == 0).collect();
                return SievePrime { p, roots, lc_zero: f6[6] % 2 == 0 };
            }
            let fq = Fq::prime(p).expect("prime");
            let poly = fpoly::from_i64(&fq, f6);
            let roots = if poly.is_empty() {
                (0..p).collect()
            } else {
                fpoly::roots(&fq, &poly).iter().map(|r| r.a as u64).collect()
            };
            SievePrime { p, roots, lc_zero: f6[6].rem_euclid(p as i64) == 0 }
        })
        .collect()
}

fn homog(f6: &[i64; 7], r: i128, spow: &[i128; 7]) -> i128 {
    let mut acc: i128 = 0;
    let mut rp: i128 = 1;
    for i in 0..7 {
        acc += f6[i] as i128 * rp * spow[6 - i];
        rp *= r;
    }
    acc
}

/// Scan one denominator s over |r| ≤ H: returns (d, r, c) with F₆(r, s) = d·c².
fn scan_row(f6: &[i64; 7], primes: &[SievePrime], h: i64, s: i64, d_bound: i64) -> (Vec<(i64, i64, u128)>, Vec<i64>) {
    let n = (2 * h + 1) as usize;
    let mut spow = [1i128; 7];
    for i in 1..7 {
        spow[i] = spow[i - 1] * s as i128;
    }
    let mut val: Vec<u128> = Vec::with_capacity(n);
    let mut sign: Vec<i8> = Vec::with_capacity(n);
    let mut live: Vec<bool> = Vec::with_capacity(n);
    let mut zeros = Vec::new();
    for i in 0..n {
        let r = i as i64 - h;
        let ok = r.gcd(&s) == 1;
        let v = if ok { homog(f6, r as i128, &spow) } else { 0 };
        if ok && v == 0 {
            zeros.push(r);
        }
        live.push(ok && v != 0);
        sign.push(if v < 0 { -1 } else { 1 });
        val.push(v.unsigned_abs());
    }
    let mut dpart: Vec<u64> = vec![1; n];
    let mut cpart: Vec<u128> = vec![1; n];
    let over = d_bound as u64;
    for sp in primes {
        let p = sp.p;
        let mut hit = |i: usize| {
            if !live[i] {
                return;
            }
            let mut e = 0;
            let pw = p as u128;
            while val[i] % pw == 0 {
                val[i] /= pw;
                e += 1;
            }
            if e % 2 == 1 {
                dpart[i] = dpart[i].saturating_mul(p);
                if dpart[i] >= over {
                    live[i] = false;
                }
            }
            cpart[i] *= pw.pow(e / 2);
        };
        let ps = s.rem_euclid(p as i64) as u64;
        if ps == 0 {
            if sp.lc_zero {
                for i in 0..n {
                    hit(i);
                }
            }
            continue;
        }
        for &rho in &sp.roots {
            let r0 = ((rho as u128 * ps as u128) % p as u128) as i64;
            // first index with r ≡ r0 (mod p), r = i − h
            let start = (r0 + h).rem_euclid(p as i64) as usize;
            let mut i = start;
            while i < n {
                hit(i);
                i += p as usize;
            }
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        if !live[i] {
            continue;
        }
        if let Some(root) = is_square_u128(val[i]) {
            let d = sign[i] as i64 * dpart[i] as i64;
            if d.abs() < d_bound {
                out.push((d, i as i64 - h, root * cpart[i]));
            }
        }
    }
    (out, zeros)
}

fn f6_of(c: &CurveModel) -> Result<[i64; 7]> {
    let f = c.f_i64();
    if f.len() > 7 || c.genus != 2 {
        return Err(Error::Invalid(format!("{} is not a genus-2 curve", c.label)));
    }
    let mut f6 = [0i64; 7];
    f6[..f.len()].copy_from_slice(&f);
    Ok(f6)
}

/// Every point of x-height ≤ H with y ≠ 0 on every twist with |d| < d_bound.
pub fn scan_twists(c: &CurveModel, h: i64, d_bound: i64) -> Result<SearchReport> {
    if h < 1 || d_bound < 2 {
        return Err(Error::Invalid("need H ≥ 1 and d_bound ≥ 2".into()));
    }
    let bound = 6.0 * (2.0 * h as f64).powi(6) * c.f_i64().iter().map(|a| a.abs() as f64).sum::<f64>();
    if bound > 1e37 {
        return Err(Error::Budget(format!("height {h} overflows the 128-bit sieve")));
    }
    let f6 = f6_of(c)?;
    let primes = sieve_primes(&f6, d_bound);
    let rows: Vec<_> = (1..=h).into_par_iter().map(|s| (s, scan_row(&f6, &primes, h, s, d_bound))).collect();
    let mut points: BTreeMap<i64, Vec<RationalPoint>> = BTreeMap::new();
    let mut weierstrass_x = Vec::new();
    for (s, (hits, zeros)) in rows {
        for (d, r, cc) in hits {
            // y = d·c/s³
            let y = Rat::new(BigInt::from(d) * BigInt::from(cc), BigInt::from(s).pow(3));
            points.entry(d).or_default().push(RationalPoint { d, r, s, y: y.abs() });
        }
        for r in zeros {
            weierstrass_x.push(Rat::new(BigInt::from(r), BigInt::from(s)));
        }
    }
    for v in points.values_mut() {
        v.sort_by_key(|p| (p.height(), p.s, p.r));
    }
    weierstrass_x.sort();
    Ok(SearchReport { label: c.label.clone(), height: h, d_bound, points, weierstrass_x })
}

/// The point (x, √(d·f(x))) when d·f(x) is a rational square.
pub fn verify_point(c: &CurveModel, d: i64, x: &Rat) -> Option<RationalPoint> {
    let v = c.f.eval_q(x) * Rat::from_integer(BigInt::from(d));
    if v.is_negative() {
        return None;
    }
    let (n, m) = rat_parts(&v);
    let (rn, rm) = (n.sqrt(), m.sqrt());
    if &rn * &rn != n || &rm * &rm != m {
        return None;
    }
    let (r, s) = rat_parts(x);
    Some(RationalPoint {
        d,
        r: i64::try_from(r).ok()?,
        s: i64::try_from(s).ok()?,
        y: Rat::new(rn, rm),
    })
}

/// Weierstrass if y = 0; cusp if x is a cusp or d = 1; otherwise a
/// noncuspidal quadratic point.
pub fn classify_point(c: &CurveModel, d: i64, p: &RationalPoint) -> Result<PointClass> {
    let x = p.x();
    let t: TwistedCurve = twist_of(c, d)?;
    if !t.contains(&x, &p.y) {
        return Err(Error::Invalid(format!("({x}, {}) is not on the {d}-twist", p.y)));
    }
    if p.y.is_zero() {
        Ok(PointClass::Weierstrass)
    } else if d == 1 || c.is_cusp_x(&x) {
        Ok(PointClass::Cusp)
    } else {
        Ok(PointClass::NoncuspidalQuadratic)
    }
}

fn twist_of(c: &CurveModel, d: i64) -> Result<TwistedCurve> {
    twist(&std::sync::Arc::new(c.clone()), d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::nt::squarefree_sieve;

    #[test]
    fn small_scan_matches_naive_loop() {
        for c in CurveModel::all() {
            let (h, b) = (30, 300);
            let rep = scan_twists(&c, h, b).unwrap();
            let mut naive: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
            for d in squarefree_sieve(b).chain(std::iter::once(1)) {
                for s in 1..=h {
                    for r in -h..=h {
                        if r.gcd(&s) != 1 {
                            continue;
                        }
                        let x = Rat::new(r.into(), s.into());
                        if let Some(p) = verify_point(&c, d, &x) {
                            if !p.y.is_zero() {
                                naive.entry(d).or_default().push((r, s));
                            }
                        }
                    }
                }
            }
            let mut got: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
            for (d, pts) in &rep.points {
                for p in pts {
                    assert!(verify_point(&c, *d, &p.x()).is_some_and(|q| q.y == p.y));
                    got.entry(*d).or_default().push((p.r, p.s));
                }
            }
            for v in naive.values_mut().chain(got.values_mut()) {
                v.sort();
            }
            assert_eq!(got, naive, "{}", c.label);
        }
    }

    #[test]
    fn x1_16_weierstrass_and_cusps() {
        let c = CurveModel::x1_16();
        let rep = scan_twists(&c, 10, 100).unwrap();
        assert_eq!(rep.weierstrass_x, vec![Rat::zero()]);
        let origin = RationalPoint { d: 5, r: 0, s: 1, y: Rat::zero() };
        assert_eq!(classify_point(&c, 5, &origin).unwrap(), PointClass::Weierstrass);
        let one = verify_point(&c, 1, &Rat::from_integer(1.into())).unwrap();
        assert_eq!(classify_point(&c, 1, &one).unwrap(), PointClass::Cusp);
    }

    #[test]
    fn the_8570_point() {
        let c = CurveModel::x1_16();
        let x = Rat::new(1681.into(), 882.into());
        let p = verify_point(&c, 8570, &x).unwrap();
        assert_eq!(p.y, Rat::new(BigInt::from(479110914870i64), BigInt::from(882).pow(3)));
        assert_eq!(classify_point(&c, 8570, &p).unwrap(), PointClass::NoncuspidalQuadratic);
    }

    #[test]
    fn verify_rejects_negative_values() {
        let c = CurveModel::x1_13();
        assert!(verify_point(&c, -1, &Rat::zero()).is_none());
        assert!(verify_point(&c, 1, &Rat::zero()).is_some());
        // f(0) = 1, so x = 0 only lies on the trivial twist
        let rep = scan_twists(&c, 1, 100).unwrap();
        assert!(rep.points.get(&1).is_some_and(|v| v.iter().any(|p| p.r == 0)));
        assert!(rep.points.iter().all(|(d, v)| *d == 1 || v.iter().all(|p| p.r != 0)));
    }
}
