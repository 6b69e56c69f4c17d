//! Necessary conditions for rational points on twists.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::nt::{factor, kronecker, primes_up_to, RHO_BUDGET};
use crate::arith::ZPoly;
use crate::curve::{CurveModel, TwistedCurve};
use crate::error::{Error, Result};
use crate::jacobian::group::{group_structure, GroupType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub filter: String,
    pub verdict: Verdict,
    pub witness: Option<String>,
}

impl FilterVerdict {
    fn pass(filter: &str) -> FilterVerdict {
        FilterVerdict { filter: filter.into(), verdict: Verdict::Pass, witness: None }
    }
    fn fail(filter: &str, witness: String) -> FilterVerdict {
        FilterVerdict { filter: filter.into(), verdict: Verdict::Fail, witness: Some(witness) }
    }
    fn inapplicable(filter: &str, why: &str) -> FilterVerdict {
        FilterVerdict { filter: filter.into(), verdict: Verdict::Inapplicable, witness: Some(why.into()) }
    }
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

impl fmt::Display for FilterVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}", self.filter, self.verdict)?;
        if let Some(w) = &self.witness {
            write!(f, " ({w})")?;
        }
        Ok(())
    }
}

/// Positivity and congruence conditions on d for levels 13 and 18.
pub fn congruence_filter(level: u32, d: i64) -> FilterVerdict {
    const NAME: &str = "congruence";
    let (modulus, residues): (i64, &[i64]) = match level {
        13 => (8, &[1]),
        18 => (24, &[1, 9]),
        _ => return FilterVerdict::inapplicable(NAME, "no congruence condition at this level"),
    };
    if d <= 0 {
        return FilterVerdict::fail(NAME, "d < 0".into());
    }
    let r = d.rem_euclid(modulus);
    if residues.contains(&r) {
        FilterVerdict::pass(NAME)
    } else {
        FilterVerdict::fail(NAME, format!("d ≡ {r} mod {modulus}"))
    }
}

fn vp(n: &BigInt, p: &BigInt) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let mut v = 0;
    let mut m = n.clone();
    while m.is_multiple_of(p) {
        m /= p;
        v += 1;
    }
    v
}

/// Whether a p-adic unit u is a square, given u mod p^prec with enough precision.
fn unit_is_square(u: &BigInt, p: u64) -> bool {
    if p == 2 {
        u.mod_floor(&BigInt::from(8)) == BigInt::one()
    } else {
        kronecker(u, &BigInt::from(p)) == 1
    }
}

/// Outcome of the residue-class search.
enum Local {
    Yes,
    No,
    Unknown,
}

/// Does g take a nonzero square value or vanish somewhere on a + p^k·Z_p?
fn class_soluble(g: &ZPoly, p: u64, a: &BigInt, k: u32, depth: u32) -> Local {
    let pb = BigInt::from(p);
    let pk = pb.pow(k);
    // Taylor coefficients of t ↦ g(a + p^k t)
    let shifted = g.compose(&ZPoly::new(vec![a.clone(), pk.clone()]));
    let c = shifted.coeffs();
    let c0 = c.first().cloned().unwrap_or_default();
    if c0.is_zero() {
        return Local::Yes;
    }
    let v0 = vp(&c0, &pb);
    let w = c[1..].iter().map(|x| vp(x, &pb)).min().unwrap_or(u32::MAX);
    let need = if p == 2 { 3 } else { 1 };
    if w != u32::MAX && v0 < w || w == u32::MAX {
        if v0 % 2 == 1 {
            return Local::No;
        }
        if w == u32::MAX || w - v0 >= need {
            let u = &c0 / pb.pow(v0);
            return if unit_is_square(&u, p) { Local::Yes } else { Local::No };
        }
    } else {
        // a root of g in the class by Hensel: v(c0) > 2·v(c1)
        let v1 = c.get(1).map(|x| vp(x, &pb)).unwrap_or(u32::MAX);
        if v1 != u32::MAX && v0 > 2 * v1 {
            return Local::Yes;
        }
    }
    if depth == 0 {
        return Local::Unknown;
    }
    let mut unknown = false;
    for j in 0..p {
        let a2 = a + BigInt::from(j) * &pk;
        match class_soluble(g, p, &a2, k + 1, depth - 1) {
            Local::Yes => return Local::Yes,
            Local::Unknown => unknown = true,
            Local::No => {}
        }
    }
    if unknown {
        Local::Unknown
    } else {
        Local::No
    }
}

/// Solubility of y² = h(x) over Q_p, checking x ∈ Z_p and x = 1/z with z ∈ pZ_p.
pub fn padic_soluble(h: &ZPoly, p: u64) -> Option<bool> {
    let n = h.deg() as usize;
    let even = n % 2 == 0;
    let depth = 40;
    let mut unknown = false;
    for chart in 0..2 {
        let (g, a, k) = if chart == 0 {
            (h.clone(), BigInt::zero(), 0)
        } else {
            if !even {
                // the point at infinity of an odd model is rational
                return Some(true);
            }
            (h.reverse(n), BigInt::zero(), 1)
        };
        match class_soluble(&g, p, &a, k, depth) {
            Local::Yes => return Some(true),
            Local::Unknown => unknown = true,
            Local::No => {}
        }
    }
    if unknown {
        None
    } else {
        Some(false)
    }
}

/// Solubility over R.
pub fn real_soluble(h: &ZPoly) -> bool {
    h.deg() % 2 == 1 || h.lc().is_positive() || h.count_real_roots() > 0
}

/// Primes at which local solubility needs more than a point count mod p.
fn els_primes(c: &TwistedCurve) -> Result<Vec<u64>> {
    let n = BigInt::from(2) * BigInt::from(c.d) * &c.base.disc * c.base.f.lc();
    let mut out: Vec<u64> = factor(&n.abs(), RHO_BUDGET)?.into_iter().map(|(p, _)| p.to_u64().unwrap()).collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Everywhere local solubility of y² = d·f(x).
pub fn is_els(c: &TwistedCurve) -> Result<FilterVerdict> {
    const NAME: &str = "els";
    if !real_soluble(&c.h) {
        return Ok(FilterVerdict::fail(NAME, "no real points".into()));
    }
    let bad = els_primes(c)?;
    let mut note = None;
    for &p in &bad {
        match padic_soluble(&c.h, p) {
            Some(true) => {}
            Some(false) => return Ok(FilterVerdict::fail(NAME, format!("no {p}-adic points"))),
            None => note = Some(format!("{p}-adic search inconclusive, treated as soluble")),
        }
    }
    // good primes: a smooth F_p point lifts; Weil guarantees one for p ≥ 17 in genus 2
    let weil = (4 * c.genus() * c.genus() + 2) as u64;
    for p in primes_up_to(weil.max(17)) {
        if p == 2 || bad.contains(&p) {
            continue;
        }
        if c.count_points(p, 1)? == 0 {
            return Ok(FilterVerdict::fail(NAME, format!("no points mod {p}")));
        }
    }
    Ok(FilterVerdict { witness: note, ..FilterVerdict::pass(NAME) })
}

/// Meet over the primes of the group types of J(F_{p^k}).
pub fn quadratic_torsion_bound(c: &CurveModel, primes: &[u64], k: u8) -> Result<GroupType> {
    if primes.is_empty() {
        return Err(Error::Invalid("empty prime list".into()));
    }
    let base = crate::curve::twist(&std::sync::Arc::new(c.clone()), 1)?;
    let mut meet: Option<GroupType> = None;
    for &p in primes {
        if !base.is_good_prime(p) {
            return Err(Error::BadPrime(p));
        }
        let (_, s) = group_structure(&base, p, k)?;
        meet = Some(match meet {
            None => s.group_type,
            Some(m) => m.meet(&s.group_type),
        });
    }
    Ok(meet.unwrap())
}

/// Whether a qualifying point forces positive rank of J^d(Q); None when d is excluded.
pub fn positive_rank_required(level: u32, d: i64) -> FilterVerdict {
    const NAME: &str = "positive_rank";
    let excluded: &[i64] = match level {
        13 | 18 => &[-3],
        16 => &[-1, 2],
        _ => return FilterVerdict::inapplicable(NAME, "level not covered"),
    };
    if excluded.contains(&d) {
        FilterVerdict::inapplicable(NAME, "extra torsion over this field")
    } else {
        FilterVerdict::pass(NAME)
    }
}
