// SPDX-License-Identifier: Apache-2.0

//! Instance arithmetic in arbitrary precision: the padding count `L(s)`, the
//! total vertex count and `N` with `q^N = T`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::glue::{GadgetKind, GammaConstants, GammaSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizingKind {
    /// `L = L(s)` from the closed form and `T = q^N`.
    Uniform,
    /// User-chosen `L`, no uniformity requirement.
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceSizes {
    pub s: usize,
    pub two_pow_s: BigUint,
    pub l: BigUint,
    pub total: BigUint,
    /// `Some` in uniform mode; in free mode only if `T` happens to be a power
    /// of `q`.
    pub n: Option<u64>,
    pub kind: SizingKind,
}

impl InstanceSizes {
    pub fn uniform(gamma: &GammaSpec, s: usize) -> Result<Self> {
        let l = compute_l(s, gamma.q(), gamma.constants())?;
        let total = total_vertices(gamma, s, &l)?;
        let n = solve_n(&total, gamma.q())?;
        Ok(InstanceSizes {
            s,
            two_pow_s: BigUint::one() << s,
            l,
            total,
            n: Some(n),
            kind: SizingKind::Uniform,
        })
    }

    pub fn free(gamma: &GammaSpec, s: usize, l: BigUint) -> Result<Self> {
        let total = total_vertices(gamma, s, &l)?;
        let n = solve_n(&total, gamma.q()).ok();
        Ok(InstanceSizes {
            s,
            two_pow_s: BigUint::one() << s,
            l,
            total,
            n,
            kind: SizingKind::Free,
        })
    }

    /// Number of glued copies, `2^s + L + 2`.
    pub fn copies(&self) -> BigUint {
        &self.two_pow_s + &self.l + 2u32
    }

    /// `⌈log₂ T⌉`, the configuration width of the encoded network.
    pub fn config_bits(&self) -> usize {
        ceil_log2(&self.total)
    }
}

pub fn ceil_log2(v: &BigUint) -> usize {
    if *v <= BigUint::one() {
        0
    } else {
        (v - 1u32).bits() as usize
    }
}

/// `L(s) = b/a · (q^((s + log_q α + 1)·μ) − 1) − α·2^s`, exactly.
pub fn compute_l(s: usize, q: u32, c: &GammaConstants) -> Result<BigUint> {
    if c.a == 0 {
        return Err(Error::Constants("a must be non-zero".into()));
    }
    let exponent = (s as u64 + c.log_q_alpha + 1)
        .checked_mul(c.mu)
        .ok_or_else(|| Error::Constants("exponent overflow".into()))?;
    let power: BigUint = Pow::pow(BigUint::from(q), exponent);
    let numerator = BigUint::from(c.b) * (power - 1u32);
    let (quotient, rem) = numerator.div_rem(&BigUint::from(c.a));
    if !rem.is_zero() {
        return Err(Error::Constants(format!(
            "a = {} does not divide b·(q^{exponent} − 1) = {numerator} for s = {s}",
            c.a
        )));
    }
    let l = BigInt::from(quotient) - BigInt::from(c.alpha) * (BigInt::one() << s);
    if l.is_negative() {
        return Err(Error::Constants(format!("L({s}) = {l} is negative")));
    }
    Ok(l.to_biguint().expect("non-negative"))
}

/// `g2 + 2^s·g0 + L·g4 + g3 − k·(2^s + L + 1)`.
pub fn total_vertices(gamma: &GammaSpec, s: usize, l: &BigUint) -> Result<BigUint> {
    let g = |kind: GadgetKind| BigInt::from(gamma.graph(kind).size());
    let two_s = BigInt::one() << s;
    let l = BigInt::from(l.clone());
    let k = BigInt::from(gamma.k());
    let t: BigInt = g(GadgetKind::G2) + &two_s * g(GadgetKind::G0) + &l * g(GadgetKind::G4) + g(GadgetKind::G3)
        - k * (&two_s + &l + 1);
    if !t.is_positive() {
        return Err(Error::Gamma(format!("total vertex count {t} is not positive")));
    }
    Ok(t.to_biguint().expect("positive"))
}

/// `N` with `q^N = T`.
pub fn solve_n(total: &BigUint, q: u32) -> Result<u64> {
    let q_big = BigUint::from(q);
    let mut rest = total.clone();
    let mut n = 0u64;
    while rest > BigUint::one() {
        let (quot, rem) = rest.div_rem(&q_big);
        if !rem.is_zero() {
            return Err(Error::NotUniform {
                total: total.to_string(),
                q,
            });
        }
        rest = quot;
        n += 1;
    }
    if rest.is_zero() || n == 0 {
        return Err(Error::NotUniform {
            total: total.to_string(),
            q,
        });
    }
    Ok(n)
}

pub fn to_usize(v: &BigUint, what: &'static str, bound: usize) -> Result<usize> {
    match v.to_usize() {
        Some(x) if x <= bound => Ok(x),
        _ => Err(Error::Bound {
            what,
            actual: v.to_string(),
            bound: bound.to_string(),
        }),
    }
}
