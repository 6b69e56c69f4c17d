//! Mordell–Weil sieve on twisted genus-2 curves.
//!
//! Rational points map to J(Q) by P ↦ [3P − D₃]. A point must land in the
//! span G of the supplied generators; reducing modulo N′ and modulo primes
//! p ∈ S, its class in G/N′G must lie in the image of C(F_p) for every p.

use std::collections::{BTreeSet, HashSet};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::nt::primes_up_to;
use crate::arith::Rat;
use crate::curve::TwistedCurve;
use crate::error::{Error, Result};
use crate::jacobian::group::group_structure;
use crate::jacobian::{AbelianGroupStructure, EffectiveDivisor, GlobalDivisor, Jacobian, MumfordDivisor};

pub const DEFAULT_BUDGET: u64 = 20_000_000;
pub const DEFAULT_PRIME_CAP: usize = 25;
pub const DEFAULT_PRIME_LIMIT: u64 = 500;
/// Survivors listed verbatim in an inconclusive certificate.
const SURVIVOR_LIST: usize = 64;

#[derive(Clone, Debug)]
pub struct SieveInput {
    pub curve: TwistedCurve,
    /// Effective degree-3 divisor D₃.
    pub base: EffectiveDivisor,
    pub generators: Vec<GlobalDivisor>,
    pub nprime: u64,
    pub primes: Vec<u64>,
    pub saturation_claimed: bool,
}

#[derive(Clone, Debug)]
pub struct SieveOptions {
    /// Upper bound on |(Z/N′)^k|.
    pub budget: u64,
    /// Half-width of the exponent box searched for relations.
    pub relation_box: i64,
}

impl Default for SieveOptions {
    fn default() -> Self {
        SieveOptions { budget: DEFAULT_BUDGET, relation_box: 2 }
    }
}

/// J(F_p)/N′ and the images of the generators and of C(F_p) in it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalImage {
    pub p: u64,
    pub group_order: u64,
    pub invariants: Vec<u64>,
    pub moduli: Vec<u64>,
    pub generator_images: Vec<Vec<u64>>,
    pub image: BTreeSet<Vec<u64>>,
}

impl LocalImage {
    pub fn quotient_size(&self) -> u64 {
        self.moduli.iter().product()
    }
    /// Bits of information: log₂ of quotient size over image size.
    pub fn information(&self) -> f64 {
        (self.quotient_size() as f64).log2() - (self.image.len().max(1) as f64).log2()
    }
    fn contains(&self, a: &[u64]) -> bool {
        let v: Vec<u64> = self
            .moduli
            .iter()
            .enumerate()
            .map(|(j, &m)| {
                a.iter().zip(&self.generator_images).fold(0u64, |acc, (&ai, g)| (acc + ai % m * g[j]) % m)
            })
            .collect();
        self.image.contains(&v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SieveOutcome {
    /// No class of G/N′G survives. Conditional unless saturation is claimed.
    Empty { conditional: bool },
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SieveCertificate {
    pub label: String,
    pub d: i64,
    pub base: EffectiveDivisor,
    pub generators: Vec<GlobalDivisor>,
    pub nprime: u64,
    pub primes: Vec<u64>,
    pub saturation_claimed: bool,
    /// Exponent vectors in the relation box vanishing at every prime of S.
    pub relations: Vec<Vec<i64>>,
    /// Local data in the order the intersection was folded.
    pub local: Vec<LocalImage>,
    pub survivor_count: u64,
    pub survivors: Vec<Vec<u64>>,
    pub outcome: SieveOutcome,
}

impl SieveCertificate {
    pub fn is_empty(&self) -> bool {
        matches!(self.outcome, SieveOutcome::Empty { .. })
    }
}

/// [3P − D₃] for a rational point P with y ≠ 0.
pub fn point_class(c: &TwistedCurve, base: &EffectiveDivisor, x: &Rat, y: &Rat) -> Result<GlobalDivisor> {
    let e = EffectiveDivisor::point_multiple(x, y, 3, &c.h.to_q())?;
    GlobalDivisor::new(vec![e], vec![base.clone()])
}

fn check_base(base: &EffectiveDivisor) -> Result<()> {
    if base.degree() != 3 {
        return Err(Error::Invalid(format!("base divisor has degree {}, need 3", base.degree())));
    }
    Ok(())
}

/// Whether the base and all generators reduce at p.
pub fn admissible(c: &TwistedCurve, base: &EffectiveDivisor, gens: &[GlobalDivisor], p: u64) -> bool {
    let pb = p.into();
    c.is_good_prime(p)
        && !base.denominator().is_multiple_of(&pb)
        && gens.iter().all(|g| !g.denominator().is_multiple_of(&pb))
}

fn image_in(jac: &Jacobian, s: &AbelianGroupStructure, base: &EffectiveDivisor, nprime: u64) -> Result<BTreeSet<Vec<u64>>> {
    let (bu, bv) = base.opposite().reduce(&jac.fq)?;
    let mut out = BTreeSet::new();
    let mut seen: HashSet<MumfordDivisor> = HashSet::new();
    for pt in jac.points() {
        let (mut parts, ip, im) = jac.point_multiple(&pt, 3);
        parts.push((bu.clone(), bv.clone()));
        let cls = jac.class_of_sum(&parts, ip, im)?;
        if seen.insert(cls) {
            out.insert(s.coords_mod(jac, &cls, nprime)?);
        }
    }
    Ok(out)
}

/// { [3P − D̄₃] mod N′·J(F_p) : P ∈ C(F_p) } with the quotient moduli.
pub fn local_curve_image(c: &TwistedCurve, p: u64, base: &EffectiveDivisor, nprime: u64) -> Result<(Vec<u64>, BTreeSet<Vec<u64>>)> {
    check_base(base)?;
    if !admissible(c, base, &[], p) {
        return Err(Error::Inadmissible { p, den: base.denominator() });
    }
    let (jac, s) = group_structure(c, p, 1)?;
    Ok((s.quotient_moduli(nprime), image_in(&jac, &s, base, nprime)?))
}

fn local_data(inp: &SieveInput, p: u64) -> Result<(LocalImage, Jacobian, Vec<MumfordDivisor>)> {
    if !admissible(&inp.curve, &inp.base, &inp.generators, p) {
        let den = inp.generators.iter().fold(inp.base.denominator(), |a, g| a.lcm(&g.denominator()));
        return Err(Error::Inadmissible { p, den });
    }
    let (jac, s) = group_structure(&inp.curve, p, 1)?;
    let reduced: Vec<MumfordDivisor> = inp.generators.iter().map(|g| g.reduce(&jac)).collect::<Result<_>>()?;
    let generator_images = reduced.iter().map(|g| s.coords_mod(&jac, g, inp.nprime)).collect::<Result<_>>()?;
    let image = image_in(&jac, &s, &inp.base, inp.nprime)?;
    let li = LocalImage {
        p,
        group_order: s.order,
        invariants: s.invariants(),
        moduli: s.quotient_moduli(inp.nprime),
        generator_images,
        image,
    };
    Ok((li, jac, reduced))
}

/// Nonzero vectors e in [−r, r]^k, first nonzero entry positive, with
/// Σ eᵢ·gᵢ = 0 in every J(F_p) supplied.
fn find_relations(reductions: &[(Jacobian, Vec<MumfordDivisor>)], k: usize, r: i64, cap: u64) -> Vec<Vec<i64>> {
    let side = (2 * r + 1) as u64;
    if k == 0 || r <= 0 || side.checked_pow(k as u32).map_or(true, |n| n > cap) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut e = vec![-r; k];
    loop {
        let lead = e.iter().find(|&&x| x != 0).copied().unwrap_or(0);
        if lead > 0 {
            let zero = reductions.iter().all(|(jac, g)| {
                let s = e.iter().zip(g).fold(jac.identity(), |acc, (&ei, gi)| jac.add(&acc, &jac.mul(gi, ei)));
                s == jac.identity()
            });
            if zero {
                out.push(e.clone());
            }
        }
        let mut i = 0;
        while i < k && e[i] == r {
            e[i] = -r;
            i += 1;
        }
        if i == k {
            break;
        }
        e[i] += 1;
    }
    out
}

/// Intersects the local conditions over (Z/N′)^k, folding primes in order.
fn intersect(local: &[LocalImage], nprime: u64, k: usize) -> (u64, Vec<Vec<u64>>) {
    let total = nprime.pow(k as u32);
    let mut count = 0;
    let mut listed = Vec::new();
    let mut a = vec![0u64; k];
    for _ in 0..total {
        if local.iter().all(|l| l.contains(&a)) {
            count += 1;
            if listed.len() < SURVIVOR_LIST {
                listed.push(a.clone());
            }
        }
        for x in a.iter_mut() {
            *x += 1;
            if *x < nprime {
                break;
            }
            *x = 0;
        }
    }
    (count, listed)
}

pub fn run_sieve(inp: &SieveInput, opts: &SieveOptions) -> Result<SieveCertificate> {
    check_base(&inp.base)?;
    if inp.nprime == 0 {
        return Err(Error::Invalid("N′ must be positive".into()));
    }
    if inp.primes.is_empty() {
        return Err(Error::Invalid("empty prime set".into()));
    }
    let k = inp.generators.len();
    let size = inp.nprime.checked_pow(k as u32).filter(|&n| n <= opts.budget);
    if size.is_none() {
        return Err(Error::Budget(format!(
            "(Z/{})^{k} exceeds the budget {}; choose a smaller N′",
            inp.nprime, opts.budget
        )));
    }
    let data: Vec<(LocalImage, Jacobian, Vec<MumfordDivisor>)> =
        inp.primes.par_iter().map(|&p| local_data(inp, p)).collect::<Result<_>>()?;
    let mut local = Vec::with_capacity(data.len());
    let mut reductions = Vec::with_capacity(data.len());
    for (li, jac, g) in data {
        local.push(li);
        reductions.push((jac, g));
    }
    let relations = find_relations(&reductions, k, opts.relation_box, 100_000);
    local.sort_by(|a, b| b.information().total_cmp(&a.information()).then(a.p.cmp(&b.p)));
    let (survivor_count, survivors) = intersect(&local, inp.nprime, k);
    let outcome = if survivor_count == 0 {
        SieveOutcome::Empty { conditional: !inp.saturation_claimed }
    } else {
        SieveOutcome::Inconclusive
    };
    Ok(SieveCertificate {
        label: inp.curve.label().to_string(),
        d: inp.curve.d,
        base: inp.base.clone(),
        generators: inp.generators.clone(),
        nprime: inp.nprime,
        primes: inp.primes.clone(),
        saturation_claimed: inp.saturation_claimed,
        relations,
        local,
        survivor_count,
        survivors,
        outcome,
    })
}

/// Re-runs the intersection from the recorded local data.
pub fn audit(cert: &SieveCertificate) -> bool {
    let k = cert.generators.len();
    if cert.local.iter().any(|l| l.generator_images.len() != k || l.generator_images.iter().any(|g| g.len() != l.moduli.len())) {
        return false;
    }
    let (count, listed) = intersect(&cert.local, cert.nprime, k);
    count == cert.survivor_count && listed == cert.survivors
}

/// |J(F_p)| for p ∈ S.
fn orders(c: &TwistedCurve, primes: &[u64]) -> Result<Vec<u64>> {
    primes.par_iter().map(|&p| c.zeta_data(p).map(|z| z.jacobian_order())).collect()
}

/// Seed 19 (level 13) or 21 (level 18), times each prime ℓ ≤ 7 dividing
/// |J(F_p)| for at least half of S.
pub fn suggest_nprime(c: &TwistedCurve, primes: &[u64]) -> Result<u64> {
    if primes.is_empty() {
        return Err(Error::Invalid("empty prime set".into()));
    }
    let ord = orders(c, primes)?;
    let mut n: u64 = match c.base.level {
        13 => 19,
        18 => 21,
        _ => 1,
    };
    for l in [2u64, 3, 5, 7] {
        if n % l == 0 {
            continue;
        }
        let hits = ord.iter().filter(|&&o| o % l == 0).count();
        if 2 * hits >= ord.len() {
            n *= l;
        }
    }
    Ok(n.max(2))
}

/// Good odd admissible primes p ≤ limit, greedily by gcd(N′, |J(F_p)|).
pub fn select_primes(inp_curve: &TwistedCurve, base: &EffectiveDivisor, gens: &[GlobalDivisor], nprime: u64, limit: u64, cap: usize) -> Result<Vec<u64>> {
    let cands: Vec<u64> = primes_up_to(limit).into_iter().filter(|&p| admissible(inp_curve, base, gens, p)).collect();
    let ord = orders(inp_curve, &cands)?;
    let mut scored: Vec<(u64, u64)> = cands.iter().zip(&ord).map(|(&p, &o)| (nprime.gcd(&o), p)).filter(|&(g, _)| g > 1).collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().take(cap).map(|(_, p)| p).collect())
}

/// (p, |J(F_p)|) over the first `count` good primes with (d/p) = 1, where
/// the twist is isomorphic to the base curve.
pub fn split_prime_orders(c: &TwistedCurve, count: usize) -> Result<Vec<(u64, u64)>> {
    let mut out = Vec::new();
    let mut bound = 1000;
    while out.len() < count {
        out.clear();
        for p in primes_up_to(bound) {
            if out.len() == count {
                break;
            }
            if !c.is_good_prime(p) || crate::arith::nt::kronecker_i64(c.d, p as i64) != 1 {
                continue;
            }
            let o = c.zeta_data(p)?.jacobian_order();
            out.push((p, o));
        }
        bound *= 2;
    }
    Ok(out)
}

/// Generator fixture file: one class per line as JSON.
pub fn parse_generators(text: &str) -> Result<Vec<GlobalDivisor>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Rational points of x-height ≤ bound with y ≠ 0, by direct search.
pub fn small_points(c: &TwistedCurve, bound: i64) -> Vec<(Rat, Rat)> {
    let h = c.h.to_q();
    let mut out = Vec::new();
    for s in 1..=bound {
        for r in -bound..=bound {
            if r.gcd(&s) != 1 {
                continue;
            }
            let x = Rat::new(r.into(), s.into());
            let v = h.eval(&x);
            if v.numer().sign() != num_bigint::Sign::Plus {
                continue;
            }
            let (n, m) = (v.numer().sqrt(), v.denom().sqrt());
            if &n * &n == *v.numer() && &m * &m == *v.denom() {
                let y = Rat::new(n, m);
                out.push((x.clone(), y.clone()));
                out.push((x, -y));
            }
        }
    }
    out
}

/// Degree-3 base divisor for a curve carrying a known point: 3P.
pub fn base_from_point(c: &TwistedCurve, x: &Rat, y: &Rat) -> Result<EffectiveDivisor> {
    EffectiveDivisor::point_multiple(x, y, 3, &c.h.to_q())
}
