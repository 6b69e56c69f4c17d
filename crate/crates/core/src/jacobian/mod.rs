//! Genus-2 Jacobians over F_q in Mumford representation.
//!
//! Three models share one Cantor composition:
//! * odd degree: the usual (u, v) with one point at infinity;
//! * even degree, nonsquare leading coefficient: (u, v) with deg u ∈ {0, 2},
//!   standing for [D − (deg u / 2)·D∞];
//! * even degree, square leading coefficient: balanced triples (u, v, n)
//!   standing for D + n·∞₊ + (2 − deg u − n)·∞₋ − D∞.

pub mod brute;
pub mod global;
pub mod group;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::field::QuadExt;
use crate::arith::fpoly::{self, deg, FPoly};
use crate::arith::{Fq, Fqe};
use crate::curve::TwistedCurve;
use crate::error::{Error, Result};

pub use global::{EffectiveDivisor, GlobalDivisor};
pub use group::AbelianGroupStructure;

const GENUS: isize = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Model {
    Odd,
    Inert,
    /// V₊ is the cubic part of √h at ∞₊.
    Split { vplus: FPoly },
}

/// A reduced divisor class. `u` is monic of degree `deg` with its leading 1
/// implicit; `n` is the weight at ∞₊ in the split model and zero otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MumfordDivisor {
    pub u: [Fqe; 2],
    pub v: [Fqe; 2],
    pub deg: u8,
    pub n: i8,
}

impl MumfordDivisor {
    pub fn u_poly(&self) -> FPoly {
        let mut u: FPoly = self.u[..self.deg as usize].to_vec();
        u.push(Fqe::ONE);
        u
    }
    pub fn v_poly(&self) -> FPoly {
        fpoly::trim(self.v[..self.deg as usize].to_vec())
    }
    fn pack(u: &[Fqe], v: &[Fqe], n: i64) -> MumfordDivisor {
        let d = deg(u);
        debug_assert!((0..=GENUS).contains(&d) && deg(v) < d.max(0));
        let mut out = MumfordDivisor { u: [Fqe::ZERO; 2], v: [Fqe::ZERO; 2], deg: d as u8, n: n as i8 };
        out.u[..d as usize].copy_from_slice(&u[..d as usize]);
        out.v[..v.len()].copy_from_slice(v);
        out
    }
}

/// A point of C(F_q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurvePoint {
    Affine(Fqe, Fqe),
    /// The point at infinity of an odd-degree model.
    Infinity,
    InfPlus,
    InfMinus,
}

#[derive(Clone, Debug)]
pub struct Jacobian {
    pub fq: Fq,
    pub h: FPoly,
    pub model: Model,
}

impl Jacobian {
    /// Jacobian of y² = h over F_q; h squarefree of degree 5 or 6.
    pub fn from_poly(fq: Fq, h: FPoly) -> Result<Jacobian> {
        let h = fpoly::trim(h);
        let dh = deg(&h);
        if dh != 5 && dh != 6 {
            return Err(Error::Invalid(format!("genus-2 model needs degree 5 or 6, got {dh}")));
        }
        if deg(&fpoly::gcd(&fq, &h, &fpoly::derivative(&fq, &h))) > 0 {
            return Err(Error::BadPrime(fq.p()));
        }
        let model = if dh == 5 {
            Model::Odd
        } else {
            match fq.sqrt(fpoly::lc(&h)).filter(|_| fq.chi(fpoly::lc(&h)) == 1) {
                None => Model::Inert,
                Some(l) => Model::Split { vplus: cubic_part(&fq, &h, l) },
            }
        };
        Ok(Jacobian { fq, h, model })
    }

    pub fn new(c: &TwistedCurve, p: u64, k: u8) -> Result<Jacobian> {
        if c.genus() != 2 {
            return Err(Error::Invalid("Jacobian arithmetic needs genus 2".into()));
        }
        if !c.is_good_prime(p) {
            return Err(Error::BadPrime(p));
        }
        let fq = Fq::new(p, k)?;
        Jacobian::from_poly(fq, c.h_mod(&fq))
    }

    pub fn is_split(&self) -> bool {
        matches!(self.model, Model::Split { .. })
    }

    pub fn identity(&self) -> MumfordDivisor {
        let n = if self.is_split() { 1 } else { 0 };
        MumfordDivisor { u: [Fqe::ZERO; 2], v: [Fqe::ZERO; 2], deg: 0, n }
    }

    /// Validates v² ≡ h (mod u) and the weight range.
    pub fn is_valid(&self, d: &MumfordDivisor) -> bool {
        let f = &self.fq;
        let (u, v) = (d.u_poly(), d.v_poly());
        let ok = fpoly::rem(f, &fpoly::sub(f, &fpoly::sqr(f, &v), &self.h), &u).is_empty();
        let range = match self.model {
            Model::Split { .. } => d.n >= 0 && d.n as isize <= GENUS - d.deg as isize,
            Model::Inert => d.n == 0 && d.deg % 2 == 0,
            Model::Odd => d.n == 0,
        };
        ok && range
    }

    pub fn neg(&self, d: &MumfordDivisor) -> MumfordDivisor {
        let f = &self.fq;
        let mut out = *d;
        for c in out.v.iter_mut() {
            *c = f.neg(*c);
        }
        if self.is_split() {
            out.n = (GENUS - d.deg as isize - d.n as isize) as i8;
        }
        out
    }

    pub fn add(&self, a: &MumfordDivisor, b: &MumfordDivisor) -> MumfordDivisor {
        let (u, v, removed) = self.compose(&(a.u_poly(), a.v_poly()), &(b.u_poly(), b.v_poly()));
        match self.model {
            Model::Split { .. } => {
                let ma = GENUS as i64 - a.deg as i64 - a.n as i64;
                let mb = GENUS as i64 - b.deg as i64 - b.n as i64;
                let r = removed as i64;
                self.reduce_split(u, v, a.n as i64 + b.n as i64 + r - 1, ma + mb + r - 1)
            }
            _ => self.reduce_plain(u, v),
        }
    }

    pub fn sub(&self, a: &MumfordDivisor, b: &MumfordDivisor) -> MumfordDivisor {
        self.add(a, &self.neg(b))
    }

    pub fn double(&self, a: &MumfordDivisor) -> MumfordDivisor {
        self.add(a, a)
    }

    pub fn mul(&self, a: &MumfordDivisor, k: i64) -> MumfordDivisor {
        let base = if k < 0 { self.neg(a) } else { *a };
        self.mul_u(&base, k.unsigned_abs())
    }

    pub fn mul_u(&self, a: &MumfordDivisor, mut k: u64) -> MumfordDivisor {
        let mut r = self.identity();
        let mut b = *a;
        while k > 0 {
            if k & 1 == 1 {
                r = self.add(&r, &b);
            }
            k >>= 1;
            if k > 0 {
                b = self.double(&b);
            }
        }
        r
    }

    /// Cantor composition without reduction. Returns (u, v, deg of the
    /// removed common part), the latter counting P + ιP pairs cancelled.
    pub fn compose(&self, a: &(FPoly, FPoly), b: &(FPoly, FPoly)) -> (FPoly, FPoly, usize) {
        let f = &self.fq;
        let (u1, v1) = a;
        let (u2, v2) = b;
        let (d1, e1, e2) = fpoly::xgcd(f, u1, u2);
        let vs = fpoly::add(f, v1, v2);
        let (d, c1, c2) = fpoly::xgcd(f, &d1, &vs);
        let s1 = fpoly::mul(f, &c1, &e1);
        let s2 = fpoly::mul(f, &c1, &e2);
        let s3 = c2;
        let dd = fpoly::sqr(f, &d);
        let u = fpoly::div_exact(f, &fpoly::mul(f, u1, u2), &dd);
        let t = fpoly::add(
            f,
            &fpoly::add(f, &fpoly::mul(f, &fpoly::mul(f, &s1, u1), v2), &fpoly::mul(f, &fpoly::mul(f, &s2, u2), v1)),
            &fpoly::mul(f, &s3, &fpoly::add(f, &fpoly::mul(f, v1, v2), &self.h)),
        );
        let v = fpoly::rem(f, &fpoly::div_exact(f, &t, &d), &u);
        (u, v, deg(&d).max(0) as usize)
    }

    /// Plain Cantor reduction (odd and inert models).
    fn reduce_plain(&self, mut u: FPoly, mut v: FPoly) -> MumfordDivisor {
        let f = &self.fq;
        while deg(&u) > GENUS {
            let num = fpoly::sub(f, &self.h, &fpoly::sqr(f, &v));
            u = fpoly::monic(f, &fpoly::div_exact(f, &num, &u));
            v = fpoly::rem(f, &fpoly::neg(f, &v), &u);
        }
        MumfordDivisor::pack(&u, &v, 0)
    }

    /// Balanced reduction: n, m are the weights at ∞₊, ∞₋ with n + m = 2 − deg u.
    fn reduce_split(&self, mut u: FPoly, mut v: FPoly, mut n: i64, mut m: i64) -> MumfordDivisor {
        let f = &self.fq;
        let Model::Split { vplus } = &self.model else { unreachable!() };
        let h_minus_v2 = fpoly::sub(f, &self.h, &fpoly::sqr(f, vplus));
        let mut steps = 0;
        loop {
            debug_assert_eq!(n + m, GENUS as i64 - deg(&u) as i64);
            let du = deg(&u) as i64;
            let plus = if du > GENUS as i64 + 1 {
                true
            } else if du == GENUS as i64 + 1 {
                n >= 0
            } else if n < 0 {
                false
            } else if m < 0 {
                true
            } else {
                return MumfordDivisor::pack(&u, &v, n);
            };
            steps += 1;
            assert!(steps < 64, "balanced reduction failed to converge");
            let ve = if plus { vplus.clone() } else { fpoly::neg(f, vplus) };
            let r = fpoly::rem(f, &fpoly::sub(f, &ve, &v), &u);
            let w = fpoly::sub(f, &ve, &r);
            let a = if r.is_empty() { GENUS as i64 + 1 - deg(&h_minus_v2) as i64 } else { -(deg(&r) as i64) };
            let num = fpoly::sub(f, &fpoly::sqr(f, &w), &self.h);
            let b = -(deg(&num) as i64) - a;
            let ut = fpoly::monic(f, &fpoly::div_exact(f, &num, &u));
            let vt = fpoly::rem(f, &fpoly::neg(f, &w), &ut);
            let (ap, am) = if plus { (a, b) } else { (b, a) };
            let dt = deg(&ut) as i64;
            n -= dt + ap;
            m -= dt + am;
            u = ut;
            v = vt;
        }
    }

    /// Class of [F − (deg F/2)·D∞] (even models) or [F − deg F·∞] (odd),
    /// where F is the affine divisor (u, v) plus the given points at infinity.
    pub fn class_of_effective(&self, u: FPoly, v: FPoly, inf_plus: i64, inf_minus: i64) -> Result<MumfordDivisor> {
        let f = &self.fq;
        let u = fpoly::monic(f, &u);
        let v = fpoly::rem(f, &v, &u);
        match &self.model {
            Model::Odd => Ok(self.reduce_plain(u, v)),
            Model::Inert => {
                if inf_plus != 0 || inf_minus != 0 || deg(&u) % 2 != 0 {
                    return Err(Error::Invalid("odd-degree divisor on an inert model".into()));
                }
                Ok(self.reduce_plain(u, v))
            }
            Model::Split { .. } => {
                let total = deg(&u) as i64 + inf_plus + inf_minus;
                if total % 2 != 0 {
                    return Err(Error::Invalid("odd-degree divisor on an even model".into()));
                }
                let k = total / 2;
                Ok(self.reduce_split(u, v, inf_plus - (k - 1), inf_minus - (k - 1)))
            }
        }
    }

    /// Sum of effective affine pieces, then the class of the total with the
    /// given extra points at infinity. Cancelled pairs count as D∞.
    pub fn class_of_sum(&self, parts: &[(FPoly, FPoly)], inf_plus: i64, inf_minus: i64) -> Result<MumfordDivisor> {
        let mut acc: (FPoly, FPoly) = (vec![Fqe::ONE], Vec::new());
        let mut removed = 0i64;
        for p in parts {
            let (u, v, r) = self.compose(&acc, p);
            acc = (u, v);
            removed += r as i64;
        }
        let (ip, im) = match self.model {
            Model::Split { .. } => (inf_plus + removed, inf_minus + removed),
            _ => (inf_plus, inf_minus),
        };
        self.class_of_effective(acc.0, acc.1, ip, im)
    }

    /// All points of C(F_q).
    pub fn points(&self) -> Vec<CurvePoint> {
        let f = &self.fq;
        let mut out = Vec::new();
        for x in f.elements() {
            let y2 = fpoly::eval(f, &self.h, x);
            if let Some(y) = f.sqrt(y2) {
                out.push(CurvePoint::Affine(x, y));
                if !y.is_zero() {
                    out.push(CurvePoint::Affine(x, f.neg(y)));
                }
            }
        }
        match self.model {
            Model::Odd => out.push(CurvePoint::Infinity),
            Model::Split { .. } => {
                out.push(CurvePoint::InfPlus);
                out.push(CurvePoint::InfMinus);
            }
            Model::Inert => {}
        }
        out
    }

    /// Mumford data (u, v, #∞₊, #∞₋) of k·P as an effective divisor.
    pub fn point_multiple(&self, p: &CurvePoint, k: usize) -> (Vec<(FPoly, FPoly)>, i64, i64) {
        match *p {
            CurvePoint::Affine(x, y) => {
                (vec![(fpoly::x_minus(&self.fq, x), fpoly::constant(y)); k], 0, 0)
            }
            CurvePoint::Infinity | CurvePoint::InfPlus => (Vec::new(), k as i64, 0),
            CurvePoint::InfMinus => (Vec::new(), 0, k as i64),
        }
    }

    /// A square root of h modulo a monic quadratic u, chosen at random.
    pub fn sqrt_mod_quadratic<R: Rng + ?Sized>(&self, u: &[Fqe], rng: &mut R) -> Option<FPoly> {
        let f = &self.fq;
        let sign = |s: Fqe, rng: &mut R| if rng.gen::<bool>() { s } else { f.neg(s) };
        let roots = fpoly::roots(f, u);
        match roots.len() {
            2 => {
                let (a, b) = (roots[0], roots[1]);
                let sa = sign(f.sqrt(fpoly::eval(f, &self.h, a))?, rng);
                let sb = sign(f.sqrt(fpoly::eval(f, &self.h, b))?, rng);
                let slope = f.div(f.sub(sb, sa), f.sub(b, a))?;
                Some(fpoly::trim(vec![f.sub(sa, f.mul(slope, a)), slope]))
            }
            1 => {
                let a = roots[0];
                let ha = fpoly::eval(f, &self.h, a);
                if ha.is_zero() {
                    return None;
                }
                let s = sign(f.sqrt(ha)?, rng);
                let dh = fpoly::eval(f, &fpoly::derivative(f, &self.h), a);
                let t = f.div(dh, f.add(s, s))?;
                Some(fpoly::trim(vec![f.sub(s, f.mul(t, a)), t]))
            }
            _ => {
                // x = z − b/2 with z² = δ
                let half = f.inv(f.from_u64(2))?;
                let b2 = f.mul(u[1], half);
                let delta = f.sub(f.sqr(b2), u[0]);
                let ext = QuadExt::new(*f, delta)?;
                let hr = fpoly::rem(f, &self.h, u);
                let h0 = hr.first().copied().unwrap_or(Fqe::ZERO);
                let h1 = hr.get(1).copied().unwrap_or(Fqe::ZERO);
                let s = ext.sqrt((f.sub(h0, f.mul(h1, b2)), h1))?;
                let s = if rng.gen::<bool>() { s } else { (f.neg(s.0), f.neg(s.1)) };
                Some(fpoly::trim(vec![f.add(s.0, f.mul(s.1, b2)), s.1]))
            }
        }
    }

    /// Near-uniform random element: a random effective degree-2 divisor.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> MumfordDivisor {
        loop {
            let u = fpoly::random_monic(&self.fq, 2, rng);
            if let Some(v) = self.sqrt_mod_quadratic(&u, rng) {
                return self.class_of_effective(u, v, 0, 0).expect("degree-2 class");
            }
        }
    }
}

/// V with deg V = 3, lc V = l and deg(h − V²) ≤ 2.
fn cubic_part(f: &Fq, h: &[Fqe], l: Fqe) -> FPoly {
    let inv2l = f.inv(f.add(l, l)).unwrap();
    let v2 = f.mul(h[5], inv2l);
    let v1 = f.mul(f.sub(h[4], f.sqr(v2)), inv2l);
    let v0 = f.mul(f.sub(h[3], f.mul(f.add(v2, v2), v1)), inv2l);
    vec![v0, v1, v2, l]
}
