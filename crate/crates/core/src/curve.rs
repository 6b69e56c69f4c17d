//! Hyperelliptic models, quadratic twists and point counts mod p.

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::nt::is_squarefree_i64;
use crate::arith::{fpoly, Fq, FPoly, Rat, ZPoly};
use crate::error::{Error, Result};

/// An integral model y² = f(x) with deg f ∈ {5, 6} (or 3, 4 for genus 1).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveModel {
    pub label: String,
    pub level: u32,
    pub f: ZPoly,
    pub genus: u32,
    pub cusp_x_poly: Option<ZPoly>,
    /// Invariant factors of the rational torsion of the Jacobian.
    pub known_rational_torsion: Vec<u64>,
    pub disc: BigInt,
    /// |Aut_Q(C)|/2 as used by the Granville constant.
    pub automorphism_factor: u32,
    /// Quadratic q with f − λq² reducible into cubics along a rational family.
    #[serde(default)]
    pub pencil: Option<ZPoly>,
}

impl CurveModel {
    pub fn new(label: &str, level: u32, f: ZPoly, cusp_x_poly: Option<ZPoly>) -> Result<CurveModel> {
        let deg = f.deg();
        if deg < 3 {
            return Err(Error::Invalid(format!("degree {deg} too small for {label}")));
        }
        let disc = f.discriminant();
        if disc.is_zero() {
            return Err(Error::Invalid(format!("{label}: f has a repeated root")));
        }
        Ok(CurveModel {
            label: label.to_string(),
            level,
            genus: ((deg - 1) / 2) as u32,
            f,
            cusp_x_poly,
            known_rational_torsion: Vec::new(),
            disc,
            automorphism_factor: 1,
            pencil: None,
        })
    }

    pub fn degree(&self) -> usize {
        self.f.deg() as usize
    }

    /// f as i64 coefficients (all fixture curves have tiny coefficients).
    pub fn f_i64(&self) -> Vec<i64> {
        self.f.to_i64().expect("coefficients fit in i64")
    }

    pub fn x1_13() -> Arc<CurveModel> {
        fixtures().hyper("X1_13")
    }
    pub fn x1_16() -> Arc<CurveModel> {
        fixtures().hyper("X1_16")
    }
    pub fn x1_18() -> Arc<CurveModel> {
        fixtures().hyper("X1_18")
    }
    pub fn by_label(label: &str) -> Result<Arc<CurveModel>> {
        fixtures()
            .hyperelliptic
            .iter()
            .find(|c| c.label == label || c.label.replace('_', "") == label.replace('_', ""))
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("unknown curve {label}")))
    }
    pub fn all() -> Vec<Arc<CurveModel>> {
        fixtures().hyperelliptic.clone()
    }

    /// Whether x is the x-coordinate of a cusp (only meaningful with a cusp polynomial).
    pub fn is_cusp_x(&self, x: &Rat) -> bool {
        self.cusp_x_poly.as_ref().is_some_and(|c| c.eval_q(x).is_zero())
    }
}

/// Weierstrass model data for the genus-1 modular curves.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EllipticFixture {
    pub label: String,
    pub group: Vec<u64>,
    pub conductor: u64,
    pub ainvs: [i64; 5],
    pub root_number: i32,
    #[serde(default)]
    pub torsion_exception: Option<i64>,
}

#[derive(Deserialize)]
struct RawHyper {
    label: String,
    level: u32,
    f: String,
    #[serde(default)]
    cusp_x: Option<String>,
    rational_torsion: Vec<u64>,
    automorphism_factor: u32,
    #[serde(default)]
    pencil: Option<String>,
}

#[derive(Deserialize)]
struct RawFixtures {
    hyperelliptic: Vec<RawHyper>,
    elliptic: Vec<EllipticFixture>,
}

pub struct Fixtures {
    pub hyperelliptic: Vec<Arc<CurveModel>>,
    pub elliptic: Vec<EllipticFixture>,
}

impl Fixtures {
    pub fn parse(text: &str) -> Result<Fixtures> {
        let raw: RawFixtures = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut hyperelliptic = Vec::new();
        for h in raw.hyperelliptic {
            let f: ZPoly = h.f.parse()?;
            let cusp = h.cusp_x.as_deref().map(str::parse::<ZPoly>).transpose()?;
            let mut c = CurveModel::new(&h.label, h.level, f, cusp)?;
            c.known_rational_torsion = h.rational_torsion;
            c.automorphism_factor = h.automorphism_factor;
            c.pencil = h.pencil.as_deref().map(str::parse::<ZPoly>).transpose()?;
            hyperelliptic.push(Arc::new(c));
        }
        Ok(Fixtures { hyperelliptic, elliptic: raw.elliptic })
    }

    fn hyper(&self, label: &str) -> Arc<CurveModel> {
        self.hyperelliptic.iter().find(|c| c.label == label).cloned().unwrap()
    }
}

pub const FIXTURE_TEXT: &str = include_str!("../data/curves.toml");

pub fn fixtures() -> &'static Fixtures {
    static F: OnceLock<Fixtures> = OnceLock::new();
    F.get_or_init(|| Fixtures::parse(FIXTURE_TEXT).expect("bundled curve fixtures parse"))
}

/// The twist y² = d·f(x).
#[derive(Clone, Debug)]
pub struct TwistedCurve {
    pub base: Arc<CurveModel>,
    pub d: i64,
    /// d·f
    pub h: ZPoly,
}

pub fn twist(base: &Arc<CurveModel>, d: i64) -> Result<TwistedCurve> {
    if !is_squarefree_i64(d) {
        return Err(Error::NotSquarefree(BigInt::from(d)));
    }
    Ok(TwistedCurve { base: base.clone(), d, h: base.f.scale(&BigInt::from(d)) })
}

impl TwistedCurve {
    pub fn label(&self) -> &str {
        &self.base.label
    }
    pub fn genus(&self) -> u32 {
        self.base.genus
    }
    pub fn degree(&self) -> usize {
        self.base.degree()
    }
    pub fn is_good_prime(&self, p: u64) -> bool {
        let pb = BigInt::from(p);
        p > 2
            && !(BigInt::from(self.d) * &self.base.disc * self.base.f.lc()).is_multiple_of(&pb)
    }
    fn check_good(&self, p: u64) -> Result<()> {
        if self.is_good_prime(p) {
            Ok(())
        } else {
            Err(Error::BadPrime(p))
        }
    }
    /// d·f reduced into F_q.
    pub fn h_mod(&self, fq: &Fq) -> FPoly {
        self.h.reduce(fq)
    }
    /// (x, y) on y² = d·f ↦ (x, y/d), the coefficient of √d on the base model.
    pub fn to_base(&self, x: &Rat, y: &Rat) -> (Rat, Rat) {
        (x.clone(), y / Rat::from_integer(BigInt::from(self.d)))
    }
    /// (x₀, y₁√d) on the base model ↦ (x₀, d·y₁) on the twist.
    pub fn from_base(&self, x0: &Rat, y1: &Rat) -> (Rat, Rat) {
        (x0.clone(), y1 * Rat::from_integer(BigInt::from(self.d)))
    }
    pub fn contains(&self, x: &Rat, y: &Rat) -> bool {
        y * y == self.h.eval_q(x)
    }

    /// Points at infinity on the smooth model over F_q.
    pub fn points_at_infinity(&self, fq: &Fq) -> u64 {
        let h = self.h_mod(fq);
        if self.degree() % 2 == 1 {
            1
        } else if fq.chi(fpoly::lc(&h)) == 1 {
            2
        } else {
            0
        }
    }

    /// |C(F_{p^k})| by a character sum over x.
    pub fn count_points(&self, p: u64, k: u8) -> Result<u64> {
        self.check_good(p)?;
        let fq = Fq::new(p, k)?;
        let h = self.h_mod(&fq);
        let mut n: i64 = 0;
        for x in fq.elements() {
            n += 1 + fq.chi(fpoly::eval(&fq, &h, x)) as i64;
        }
        Ok(n as u64 + self.points_at_infinity(&fq))
    }

    /// |C(F_{p^k})| by enumerating all pairs; slow, for cross-checks.
    pub fn count_points_naive(&self, p: u64, k: u8) -> Result<u64> {
        self.check_good(p)?;
        let fq = Fq::new(p, k)?;
        let h = self.h_mod(&fq);
        let mut n = 0u64;
        for x in fq.elements() {
            let v = fpoly::eval(&fq, &h, x);
            n += fq.elements().filter(|&y| fq.sqr(y) == v).count() as u64;
        }
        let mut inf = 1;
        if self.degree() % 2 == 0 {
            let l = fpoly::lc(&h);
            inf = fq.elements().filter(|&y| fq.sqr(y) == l).count() as u64;
        }
        Ok(n + inf)
    }

    pub fn zeta_data(&self, p: u64) -> Result<ZetaData> {
        if self.genus() != 2 {
            return Err(Error::Invalid("zeta data implemented for genus 2".into()));
        }
        let n1 = self.count_points(p, 1)? as i64;
        let n2 = self.count_points(p, 2)? as i64;
        ZetaData::from_counts(p, n1, n2)
    }
}

/// Frobenius data of a genus-2 curve over F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZetaData {
    pub p: u64,
    pub n1: i64,
    pub n2: i64,
    pub a1: i64,
    pub a2: i64,
}

impl ZetaData {
    pub fn from_counts(p: u64, n1: i64, n2: i64) -> Result<ZetaData> {
        let pi = p as i64;
        let a1 = n1 - (pi + 1);
        let t = n2 - pi * pi - 1 + a1 * a1;
        if t % 2 != 0 {
            return Err(Error::Inconsistent(format!("odd a2 numerator at p = {p}")));
        }
        let z = ZetaData { p, n1, n2, a1, a2: t / 2 };
        if (a1 * a1) as f64 > 16.0 * p as f64 || z.jacobian_order_k(1) <= 0 {
            return Err(Error::Inconsistent(format!("Weil bound violated at p = {p}")));
        }
        Ok(z)
    }
    /// Coefficients of P(T) = 1 + a1·T + a2·T² + p·a1·T³ + p²·T⁴.
    pub fn l_poly(&self) -> [i64; 5] {
        let p = self.p as i64;
        [1, self.a1, self.a2, p * self.a1, p * p]
    }
    fn l_at(&self, t: i64) -> i64 {
        self.l_poly().iter().rev().fold(0, |acc, &c| acc * t + c)
    }
    /// |J(F_{p^k})| for k ∈ {1, 2}.
    pub fn jacobian_order_k(&self, k: u32) -> i64 {
        match k {
            1 => self.l_at(1),
            2 => self.l_at(1) * self.l_at(-1),
            _ => panic!("jacobian_order_k supports k = 1, 2"),
        }
    }
    pub fn jacobian_order(&self) -> u64 {
        self.jacobian_order_k(1) as u64
    }
}

/// Convenience: small-integer view of a rational x = r/s.
pub fn rat_parts(x: &Rat) -> (BigInt, BigInt) {
    (x.numer().clone(), x.denom().clone())
}

pub fn rat_from_i64(r: i64, s: i64) -> Rat {
    Rat::new(BigInt::from(r), BigInt::from(s))
}

pub fn abs_i64(x: &BigInt) -> i64 {
    x.abs().to_i64().unwrap_or(i64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::nt::{kronecker_i64, primes_up_to};
    use proptest::prelude::*;

    #[test]
    fn fixtures_load() {
        let c13 = CurveModel::x1_13();
        assert_eq!(c13.genus, 2);
        assert_eq!(c13.disc, BigInt::from(-(1i64 << 12) * 169));
        let c16 = CurveModel::x1_16();
        assert_eq!(c16.degree(), 5);
        assert!(c16.is_cusp_x(&rat_from_i64(1, 1)));
        assert!(c16.is_cusp_x(&rat_from_i64(0, 1)));
        assert!(!c16.is_cusp_x(&rat_from_i64(1681, 882)));
        assert_eq!(fixtures().elliptic.len(), 5);
    }

    #[test]
    fn twist_basics() {
        let c = CurveModel::x1_13();
        assert_eq!(twist(&c, 1).unwrap().h, c.f);
        assert!(twist(&c, 12).is_err());
        let c16 = CurveModel::x1_16();
        let t = twist(&c16, 8570).unwrap();
        let x = rat_from_i64(1681, 882);
        let y = Rat::new(BigInt::from(479110914870i64), BigInt::from(882i64).pow(3));
        assert!(t.contains(&x, &y));
        let (x0, y1) = t.to_base(&x, &y);
        assert_eq!(t.from_base(&x0, &y1), (x, y));
    }

    #[test]
    fn x16_over_f3_has_six_points() {
        let t = twist(&CurveModel::x1_16(), 1).unwrap();
        assert_eq!(t.count_points(3, 1).unwrap(), 6);
        assert_eq!(t.count_points_naive(3, 1).unwrap(), 6);
    }

    #[test]
    fn bad_primes_rejected() {
        let t = twist(&CurveModel::x1_13(), 17).unwrap();
        assert!(matches!(t.count_points(13, 1), Err(Error::BadPrime(13))));
        assert!(matches!(t.count_points(17, 1), Err(Error::BadPrime(17))));
        assert!(t.count_points(2, 1).is_err());
    }

    #[test]
    fn character_sum_matches_naive() {
        for c in CurveModel::all() {
            for d in [1i64, -1, 2, 3, -7, 17] {
                let t = twist(&c, d).unwrap();
                for p in primes_up_to(13) {
                    if !t.is_good_prime(p) {
                        continue;
                    }
                    for k in [1u8, 2] {
                        assert_eq!(t.count_points(p, k).unwrap(), t.count_points_naive(p, k).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn split_and_inert_twists() {
        for c in CurveModel::all() {
            let base = twist(&c, 1).unwrap();
            for d in [-1i64, 2, 3, 5, -7, 17, 33] {
                let t = twist(&c, d).unwrap();
                for p in primes_up_to(60) {
                    if !t.is_good_prime(p) {
                        continue;
                    }
                    let zb = base.zeta_data(p).unwrap();
                    let zt = t.zeta_data(p).unwrap();
                    match kronecker_i64(d, p as i64) {
                        1 => assert_eq!(zb, zt),
                        -1 => assert_eq!(zt.a1, -zb.a1),
                        _ => unreachable!(),
                    }
                }
            }
        }
    }

    #[test]
    fn x13_p5_order_over_f25_divisible_by_19() {
        let t = twist(&CurveModel::x1_13(), 1).unwrap();
        let z = t.zeta_data(5).unwrap();
        assert_eq!(z.jacobian_order_k(2) % 19, 0);
    }

    proptest! {
        #[test]
        fn weil_bounds(ci in 0usize..3, d in -50i64..50, pi in 1usize..60) {
            let c = CurveModel::all()[ci].clone();
            prop_assume!(is_squarefree_i64(d));
            let t = twist(&c, d).unwrap();
            let p = primes_up_to(300)[pi];
            prop_assume!(t.is_good_prime(p));
            let z = t.zeta_data(p).unwrap();
            let sp = (p as f64).sqrt();
            let j = z.jacobian_order_k(1) as f64;
            prop_assert!(j > (sp - 1.0).powi(4) && j < (sp + 1.0).powi(4));
            prop_assert!(z.n2 >= z.n1);
            prop_assert!((z.a1.abs() as f64) <= 4.0 * sp);
            if p >= 17 {
                prop_assert!((z.n1 as f64) >= p as f64 + 1.0 - 4.0 * sp);
            }
        }
    }
}
