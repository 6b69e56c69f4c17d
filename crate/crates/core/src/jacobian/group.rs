//! Abelian group structure of J(F_q) from random elements.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Jacobian, MumfordDivisor};
use crate::arith::nt::factor_u64;
use crate::curve::TwistedCurve;
use crate::error::{Error, Result};

/// Largest Sylow subgroup for which a full discrete-log table is built.
pub const TABLE_LIMIT: u64 = 1 << 22;

/// Isomorphism type of a finite abelian group: ℓ ↦ exponents, descending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupType {
    pub parts: BTreeMap<u64, Vec<u32>>,
}

impl GroupType {
    pub fn from_invariants(inv: &[u64]) -> GroupType {
        let mut parts: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
        for &n in inv {
            for (l, e) in factor_u64(n) {
                parts.entry(l).or_default().push(e);
            }
        }
        for v in parts.values_mut() {
            v.sort_unstable_by(|a, b| b.cmp(a));
        }
        GroupType { parts }
    }

    pub fn trivial() -> GroupType {
        GroupType::default()
    }

    pub fn order(&self) -> u64 {
        self.parts
            .iter()
            .map(|(&l, es)| es.iter().map(|&e| l.pow(e)).product::<u64>())
            .product()
    }

    /// Invariant factors n₁ | n₂ | …, ascending, without 1s.
    pub fn invariants(&self) -> Vec<u64> {
        let rank = self.parts.values().map(Vec::len).max().unwrap_or(0);
        let mut out: Vec<u64> = (0..rank)
            .map(|i| {
                self.parts
                    .iter()
                    .map(|(&l, es)| l.pow(*es.get(i).unwrap_or(&0)))
                    .product()
            })
            .collect();
        out.reverse();
        out
    }

    /// Componentwise minimum of the sorted exponent vectors, per ℓ.
    pub fn meet(&self, o: &GroupType) -> GroupType {
        let mut parts = BTreeMap::new();
        for (l, a) in &self.parts {
            if let Some(b) = o.parts.get(l) {
                let m: Vec<u32> = a.iter().zip(b).map(|(x, y)| *x.min(y)).filter(|&e| e > 0).collect();
                if !m.is_empty() {
                    parts.insert(*l, m);
                }
            }
        }
        GroupType { parts }
    }

    /// Whether this type embeds in `o` as a subgroup.
    pub fn is_subgroup_of(&self, o: &GroupType) -> bool {
        self.parts.iter().all(|(l, a)| {
            let b = o.parts.get(l).cloned().unwrap_or_default();
            a.len() <= b.len() && a.iter().zip(&b).all(|(x, y)| x <= y)
        })
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inv = self.invariants();
        if inv.is_empty() {
            return write!(f, "0");
        }
        let s: Vec<String> = inv.iter().map(|n| format!("Z/{n}")).collect();
        write!(f, "{}", s.join(" + "))
    }
}

/// A basis of the ℓ-Sylow subgroup with a discrete-log table.
#[derive(Clone, Debug)]
pub struct SylowBasis {
    pub ell: u64,
    /// ℓ^e = order of the Sylow subgroup.
    pub order: u64,
    pub exps: Vec<u32>,
    pub gens: Vec<MumfordDivisor>,
    table: HashMap<MumfordDivisor, Vec<u64>>,
}

impl SylowBasis {
    pub fn moduli(&self) -> Vec<u64> {
        self.exps.iter().map(|&e| self.ell.pow(e)).collect()
    }
    /// Coordinates of an element already lying in the Sylow subgroup.
    pub fn log(&self, x: &MumfordDivisor) -> Option<&[u64]> {
        self.table.get(x).map(|v| v.as_slice())
    }
    pub fn has_table(&self) -> bool {
        !self.table.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct AbelianGroupStructure {
    pub order: u64,
    pub group_type: GroupType,
    pub sylow: Vec<SylowBasis>,
}

impl AbelianGroupStructure {
    pub fn invariants(&self) -> Vec<u64> {
        self.group_type.invariants()
    }

    /// Generators g_i of order n_i matching the invariant factors.
    pub fn generators(&self, jac: &Jacobian) -> Vec<MumfordDivisor> {
        let rank = self.sylow.iter().map(|s| s.gens.len()).max().unwrap_or(0);
        let mut out = Vec::new();
        for i in 0..rank {
            let mut g = jac.identity();
            for s in &self.sylow {
                if let Some(x) = s.gens.get(i) {
                    g = jac.add(&g, x);
                }
            }
            out.push(g);
        }
        out.reverse();
        out
    }

    /// Coordinates of x in ⊕ Z/ℓ^{min(aᵢ, v_ℓ(N′))}, over the ℓ dividing N′.
    pub fn coords_mod(&self, jac: &Jacobian, x: &MumfordDivisor, nprime: u64) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        for s in &self.sylow {
            let mut v = 0;
            let mut t = nprime;
            while t % s.ell == 0 {
                t /= s.ell;
                v += 1;
            }
            if v == 0 {
                continue;
            }
            if !s.has_table() {
                return Err(Error::Budget(format!("no log table for the {}-part", s.ell)));
            }
            let cof = self.order / s.order;
            let y = jac.mul_u(x, cof);
            let c = s
                .log(&y)
                .ok_or_else(|| Error::Inconsistent("element outside its Sylow table".into()))?;
            // x's coordinates are c·cof⁻¹ in each cyclic factor
            for ((ci, &m), &e) in c.iter().zip(&s.moduli()).zip(&s.exps) {
                let inv = crate::arith::nt::invmod(cof % m, m).unwrap_or(0);
                let full = if m == 1 { 0 } else { (*ci as u128 * inv as u128 % m as u128) as u64 };
                out.push(full % s.ell.pow(e.min(v)));
            }
        }
        Ok(out)
    }

    /// The moduli matching [`coords_mod`].
    pub fn quotient_moduli(&self, nprime: u64) -> Vec<u64> {
        let mut out = Vec::new();
        for s in &self.sylow {
            let mut v = 0;
            let mut t = nprime;
            while t % s.ell == 0 {
                t /= s.ell;
                v += 1;
            }
            if v == 0 {
                continue;
            }
            for &e in &s.exps {
                out.push(s.ell.pow(e.min(v)));
            }
        }
        out
    }
}

fn ilog(m: u64, l: u64) -> u32 {
    let mut e = 0;
    let mut t = m;
    while t > 1 {
        t /= l;
        e += 1;
    }
    e
}

/// Smith form D = U·R·V of a square integer matrix; returns (diag, V⁻¹).
pub fn smith_normal_form(mut r: Vec<Vec<i128>>) -> (Vec<i128>, Vec<Vec<i128>>) {
    let n = r.len();
    let mut vinv: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    for t in 0..n {
        loop {
            // pivot: smallest nonzero |entry| in the lower-right block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if r[i][j] != 0 && best.is_none_or(|(bi, bj)| r[i][j].abs() < r[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            r.swap(t, pi);
            if pj != t {
                for row in r.iter_mut() {
                    row.swap(t, pj);
                }
                vinv.swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..n {
                let q = r[i][t].div_euclid(r[t][t]);
                if q != 0 {
                    for j in t..n {
                        r[i][j] -= q * r[t][j];
                    }
                }
                clean &= r[i][t] == 0;
            }
            for j in t + 1..n {
                let q = r[t][j].div_euclid(r[t][t]);
                if q != 0 {
                    for row in r.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    // column j += (−q)·column t  ⇒  V⁻¹ row t += q·row j
                    for k in 0..n {
                        vinv[t][k] += q * vinv[j][k];
                    }
                }
                clean &= r[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // divisibility of the remaining block by the pivot
            let piv = r[t][t];
            let bad = (t + 1..n).find(|&i| (t + 1..n).any(|j| r[i][j] % piv != 0));
            match bad {
                Some(i) => {
                    let row = r[i].clone();
                    for (x, y) in r[t].iter_mut().zip(row) {
                        *x += y;
                    }
                }
                None => break,
            }
        }
        if r[t][t] < 0 {
            for row in r.iter_mut() {
                row[t] = -row[t];
            }
            for x in vinv[t].iter_mut() {
                *x = -*x;
            }
        }
    }
    ((0..n).map(|i| r[i][i]).collect(), vinv)
}

fn build_table(jac: &Jacobian, gens: &[MumfordDivisor], moduli: &[u64]) -> HashMap<MumfordDivisor, Vec<u64>> {
    let mut table: HashMap<MumfordDivisor, Vec<u64>> = HashMap::new();
    table.insert(jac.identity(), Vec::new());
    for (g, &m) in gens.iter().zip(moduli) {
        let mut next = HashMap::with_capacity(table.len() * m as usize);
        for (x, c) in &table {
            let mut y = *x;
            for t in 0..m {
                let mut cc = c.clone();
                cc.push(t);
                next.insert(y, cc);
                y = jac.add(&y, g);
            }
        }
        table = next;
    }
    table
}

fn sylow_basis(jac: &Jacobian, order: u64, ell: u64, e: u32, rng: &mut ChaCha8Rng) -> Result<SylowBasis> {
    let sz = ell.pow(e);
    let cof = order / sz;
    let random_in_sylow = |rng: &mut ChaCha8Rng| jac.mul_u(&jac.random_element(rng), cof);
    if e == 1 && sz > TABLE_LIMIT {
        for _ in 0..1000 {
            let g = random_in_sylow(rng);
            if g != jac.identity() {
                return Ok(SylowBasis { ell, order: sz, exps: vec![1], gens: vec![g], table: HashMap::new() });
            }
        }
        return Err(Error::Inconsistent(format!("no element of order {ell} found")));
    }
    if sz > TABLE_LIMIT {
        return Err(Error::Budget(format!("{ell}-Sylow subgroup of order {sz} too large")));
    }
    let mut gens: Vec<MumfordDivisor> = Vec::new();
    let mut exps: Vec<u32> = Vec::new();
    let mut table = build_table(jac, &gens, &[]);
    let mut tries = 0;
    while (table.len() as u64) < sz {
        tries += 1;
        if tries > 10_000 {
            return Err(Error::Inconsistent(format!("{ell}-Sylow basis stalled at {}/{sz}", table.len())));
        }
        let x = random_in_sylow(rng);
        if table.contains_key(&x) {
            continue;
        }
        let mut y = x;
        let mut j = 0u32;
        while !table.contains_key(&y) {
            y = jac.mul_u(&y, ell);
            j += 1;
            if j > e {
                return Err(Error::Inconsistent(format!("element order exceeds {ell}^{e}")));
            }
        }
        let c = table[&y].clone();
        let k = gens.len();
        let mut rel = vec![vec![0i128; k + 1]; k + 1];
        for i in 0..k {
            rel[i][i] = ell.pow(exps[i]) as i128;
            rel[k][i] = -(c[i] as i128);
        }
        rel[k][k] = ell.pow(j) as i128;
        let (diag, vinv) = smith_normal_form(rel);
        let mut all = gens.clone();
        all.push(x);
        let mut ng = Vec::new();
        let mut ne = Vec::new();
        for (row, &dj) in vinv.iter().zip(&diag) {
            if dj == 1 {
                continue;
            }
            let mut g = jac.identity();
            for (coef, gi) in row.iter().zip(&all) {
                let c = coef.rem_euclid(sz as i128) as u64;
                if c != 0 {
                    g = jac.add(&g, &jac.mul_u(gi, c));
                }
            }
            ng.push(g);
            ne.push(ilog(dj as u64, ell));
        }
        // descending exponents
        let mut idx: Vec<usize> = (0..ng.len()).collect();
        idx.sort_by(|&a, &b| ne[b].cmp(&ne[a]));
        gens = idx.iter().map(|&i| ng[i]).collect();
        exps = idx.iter().map(|&i| ne[i]).collect();
        let moduli: Vec<u64> = exps.iter().map(|&e| ell.pow(e)).collect();
        table = build_table(jac, &gens, &moduli);
        if table.len() as u64 != moduli.iter().product::<u64>() {
            return Err(Error::Inconsistent("Smith basis is not independent".into()));
        }
    }
    for (g, &e) in gens.iter().zip(&exps) {
        let m = ell.pow(e);
        if jac.mul_u(g, m) != jac.identity() || jac.mul_u(g, m / ell) == jac.identity() {
            return Err(Error::Inconsistent("generator order mismatch".into()));
        }
    }
    Ok(SylowBasis { ell, order: sz, exps, gens, table })
}

impl Jacobian {
    /// Structure of J(F_q) given its order, deterministic for a seed.
    pub fn structure(&self, order: u64, seed: u64) -> Result<AbelianGroupStructure> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ self.fq.p() ^ ((self.fq.k() as u64) << 40));
        for _ in 0..4 {
            let x = self.random_element(&mut rng);
            if self.mul_u(&x, order) != self.identity() {
                return Err(Error::Inconsistent(format!("order {order} does not annihilate J")));
            }
        }
        let mut sylow = Vec::new();
        let mut parts = BTreeMap::new();
        for (l, e) in factor_u64(order) {
            let s = sylow_basis(self, order, l, e, &mut rng)?;
            parts.insert(l, s.exps.clone());
            sylow.push(s);
        }
        Ok(AbelianGroupStructure { order, group_type: GroupType { parts }, sylow })
    }
}

/// Group structure of J(F_{p^k}) for a twisted genus-2 curve.
pub fn group_structure(c: &TwistedCurve, p: u64, k: u8) -> Result<(Jacobian, AbelianGroupStructure)> {
    let z = c.zeta_data(p)?;
    let order = z.jacobian_order_k(k as u32) as u64;
    let jac = Jacobian::new(c, p, k)?;
    let s = jac.structure(order, 0x5eed)?;
    Ok((jac, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat_mul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
        let n = a.len();
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
    }

    proptest! {
        #[test]
        fn snf_diagonal_divides(m in proptest::collection::vec(-30i128..30, 9)) {
            let r: Vec<Vec<i128>> = m.chunks(3).map(|c| c.to_vec()).collect();
            let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
                - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
                + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
            prop_assume!(det != 0);
            let (d, vinv) = smith_normal_form(r.clone());
            prop_assert_eq!(d.iter().product::<i128>(), det.abs());
            prop_assert!(d.windows(2).all(|w| w[1] % w[0] == 0));
            // R·V has rows in the lattice spanned by the diagonal: (R·V)·V⁻¹ = R
            // so check V⁻¹ is unimodular via |det| = 1
            let v = &vinv;
            let dv = v[0][0] * (v[1][1] * v[2][2] - v[1][2] * v[2][1])
                - v[0][1] * (v[1][0] * v[2][2] - v[1][2] * v[2][0])
                + v[0][2] * (v[1][0] * v[2][1] - v[1][1] * v[2][0]);
            prop_assert_eq!(dv.abs(), 1);
            let _ = mat_mul(&r, &vinv);
        }
    }

    /// All subgroup types of a small abelian ℓ-group, by brute force over
    /// subsets generated by up to two elements of Z/ℓ^a × Z/ℓ^b × Z/ℓ^c.
    fn subgroup_types(mods: &[u64]) -> Vec<GroupType> {
        let elems: Vec<Vec<u64>> = {
            let mut v = vec![vec![]];
            for &m in mods {
                v = v.into_iter().flat_map(|p: Vec<u64>| (0..m).map(move |t| { let mut q = p.clone(); q.push(t); q })).collect();
            }
            v
        };
        let order_of = |x: &Vec<u64>| -> u64 {
            let mut k = 1;
            loop {
                if x.iter().zip(mods).all(|(a, m)| a * k % m == 0) {
                    return k;
                }
                k += 1;
            }
        };
        let mut out = Vec::new();
        for a in &elems {
            for b in &elems {
                let mut span = std::collections::HashSet::new();
                for i in 0..order_of(a) {
                    for j in 0..order_of(b) {
                        let z: Vec<u64> = a.iter().zip(b).zip(mods).map(|((x, y), m)| (x * i + y * j) % m).collect();
                        span.insert(z);
                    }
                }
                // type from counts of elements killed by ℓ^k
                let l = factor_u64(mods[0])[0].0;
                let mut ranks = Vec::new();
                let mut prev = 1usize;
                let mut k = 1;
                loop {
                    let lk = l.pow(k);
                    let cnt = span.iter().filter(|z| z.iter().zip(mods).all(|(x, m)| x * lk % m == 0)).count();
                    if cnt == prev {
                        break;
                    }
                    ranks.push(((cnt / prev) as f64).log(l as f64).round() as u32);
                    prev = cnt;
                    k += 1;
                }
                // ranks[k] = #{i : e_i > k}
                let mut exps = Vec::new();
                for i in 0..ranks.first().copied().unwrap_or(0) {
                    exps.push(ranks.iter().filter(|&&r| r > i).count() as u32);
                }
                let mut parts = BTreeMap::new();
                if !exps.is_empty() {
                    parts.insert(l, exps);
                }
                out.push(GroupType { parts });
            }
        }
        out
    }

    #[test]
    fn meet_matches_exhaustive_subgroup_search() {
        for (a, b) in [(vec![4u64, 2], vec![8u64]), (vec![2, 2], vec![4, 2]), (vec![9, 3], vec![3, 3]), (vec![8, 2], vec![4, 4])] {
            let ga = GroupType::from_invariants(&a);
            let gb = GroupType::from_invariants(&b);
            let sa = subgroup_types(&a);
            let sb = subgroup_types(&b);
            // the meet is the largest type embedding in both
            let common: Vec<&GroupType> = sa.iter().filter(|t| sb.contains(t)).collect();
            let best = common.iter().max_by_key(|t| t.order()).unwrap();
            let m = ga.meet(&gb);
            assert_eq!(&&m, best, "{a:?} {b:?}");
            assert!(common.iter().all(|t| t.is_subgroup_of(&m)));
        }
    }

    #[test]
    fn invariants_roundtrip() {
        let g = GroupType::from_invariants(&[3, 21]);
        assert_eq!(g.invariants(), vec![3, 21]);
        assert_eq!(g.to_string(), "Z/3 + Z/21");
        let h = GroupType::from_invariants(&[2, 2, 2, 10]);
        assert_eq!(h.invariants(), vec![2, 2, 2, 10]);
        assert_eq!(h.order(), 80);
        assert_eq!(h.meet(&GroupType::from_invariants(&[4, 20])).invariants(), vec![2, 10]);
    }
}
