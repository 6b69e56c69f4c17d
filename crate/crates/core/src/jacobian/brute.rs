//! Exhaustive enumeration of reduced divisors, for small fields.

use super::{Jacobian, Model, MumfordDivisor};
use crate::arith::fpoly;
use crate::arith::Fqe;
use crate::curve::TwistedCurve;
use crate::error::Result;

/// All semi-reduced (u, v) with deg u ≤ 2, by brute force over u and v.
fn semi_reduced(jac: &Jacobian) -> Vec<(Vec<Fqe>, Vec<Fqe>)> {
    let f = &jac.fq;
    let els: Vec<Fqe> = f.elements().collect();
    let mut out = vec![(Vec::new(), Vec::new())];
    for &a in &els {
        for &c in &els {
            if f.sqr(c) == fpoly::eval(f, &jac.h, f.neg(a)) {
                out.push((vec![a], vec![c]));
            }
        }
    }
    for &u0 in &els {
        for &u1 in &els {
            let u = vec![u0, u1, Fqe::ONE];
            let hr = fpoly::rem(f, &jac.h, &u);
            for &v0 in &els {
                for &v1 in &els {
                    let v = fpoly::trim(vec![v0, v1]);
                    if fpoly::rem(f, &fpoly::sqr(f, &v), &u) == hr {
                        out.push((vec![u0, u1], vec![v0, v1]));
                    }
                }
            }
        }
    }
    out
}

/// Every element of J(F_q) in reduced form.
pub fn enumerate(jac: &Jacobian) -> Vec<MumfordDivisor> {
    let mut out = Vec::new();
    for (u, v) in semi_reduced(jac) {
        let d = u.len();
        let mut m = MumfordDivisor { u: [Fqe::ZERO; 2], v: [Fqe::ZERO; 2], deg: d as u8, n: 0 };
        m.u[..d].copy_from_slice(&u);
        m.v[..v.len()].copy_from_slice(&v);
        match jac.model {
            Model::Odd => out.push(m),
            Model::Inert => {
                if d % 2 == 0 {
                    out.push(m);
                }
            }
            Model::Split { .. } => {
                for n in 0..=(2 - d) as i8 {
                    out.push(MumfordDivisor { n, ..m });
                }
            }
        }
    }
    out
}

/// |J(F_{p^k})| by enumeration. Only practical for q ≲ 50.
pub fn brute_force_jacobian_order(c: &TwistedCurve, p: u64, k: u8) -> Result<u64> {
    let jac = Jacobian::new(c, p, k)?;
    Ok(enumerate(&jac).len() as u64)
}
