// SPDX-License-Identifier: Apache-2.0

//! Arithmetic combinators over little-endian buses.
//!
//! Everything here is linear in the bus width for a fixed constant operand,
//! and all constants are known at emission time.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

use super::emit::{Bus, Emitter, GateSink};
use super::GateId;
use crate::error::{Error, Result};

fn bit_len(v: &BigUint) -> usize {
    v.bits() as usize
}

impl<S: GateSink> Emitter<S> {
    /// Constant bus holding the low `width` bits of `value`.
    pub fn const_bus(&mut self, value: &BigUint, width: usize) -> Bus {
        let wires = (0..width)
            .map(|k| self.constant(value.bit(k as u64)))
            .collect();
        self.bus(wires)
    }

    /// Zero-extends or truncates to `width`.
    pub fn resize(&mut self, bus: &[GateId], width: usize) -> Bus {
        let zero = self.constant(false);
        let wires = (0..width)
            .map(|k| bus.get(k).copied().unwrap_or(zero))
            .collect();
        self.bus(wires)
    }

    /// One bit that is set iff `bus < threshold`.
    pub fn comparator_const(&mut self, bus: &[GateId], threshold: &BigUint) -> Result<GateId> {
        if bit_len(threshold) > bus.len() {
            return Err(Error::Construction(format!(
                "comparator threshold {threshold} does not fit in {} bits",
                bus.len()
            )));
        }
        // Scan from the least-significant bit: at bit k, `lt` means the low
        // k+1 bits of the bus are below those of the threshold.
        let mut lt = self.constant(false);
        for (k, &a) in bus.iter().enumerate() {
            let na = self.not(a);
            lt = if threshold.bit(k as u64) {
                self.or(na, lt)
            } else {
                self.and(na, lt)
            };
        }
        Ok(lt)
    }

    /// `bus >= threshold`.
    pub fn ge_const(&mut self, bus: &[GateId], threshold: &BigUint) -> Result<GateId> {
        let lt = self.comparator_const(bus, threshold)?;
        Ok(self.not(lt))
    }

    /// Equality with a constant; constant-false if the value does not fit.
    pub fn eq_const(&mut self, bus: &[GateId], value: &BigUint) -> GateId {
        if bit_len(value) > bus.len() {
            return self.constant(false);
        }
        let mut acc = self.constant(true);
        for (k, &a) in bus.iter().enumerate() {
            let lit = if value.bit(k as u64) { a } else { self.not(a) };
            acc = self.and(acc, lit);
        }
        acc
    }

    pub fn eq_small(&mut self, bus: &[GateId], value: u64) -> GateId {
        self.eq_const(bus, &BigUint::from(value))
    }

    /// Unsigned `a < b` for equal-width buses.
    pub fn less_than(&mut self, a: &[GateId], b: &[GateId]) -> Result<GateId> {
        if a.len() != b.len() {
            return Err(Error::Construction(format!(
                "comparator width mismatch: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        let mut lt = self.constant(false);
        for (&x, &y) in a.iter().zip(b) {
            let nx = self.not(x);
            let strictly = self.and(nx, y);
            let differ = self.xor(x, y);
            let same = self.not(differ);
            let carry = self.and(same, lt);
            lt = self.or(strictly, carry);
        }
        Ok(lt)
    }

    /// Per-bit `(sel & a) | (!sel & b)`; `sel = 1` picks `a`.
    pub fn mux(&mut self, sel: GateId, a: &[GateId], b: &[GateId]) -> Result<Bus> {
        if a.len() != b.len() {
            return Err(Error::Construction(format!(
                "mux width mismatch: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        let nsel = self.not(sel);
        let wires = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| {
                if x == y {
                    return x;
                }
                let l = self.and(sel, x);
                let r = self.and(nsel, y);
                self.or(l, r)
            })
            .collect();
        Ok(self.bus(wires))
    }

    pub fn mask(&mut self, bit: GateId, bus: &[GateId]) -> Bus {
        let wires = bus.iter().map(|&w| self.and(bit, w)).collect();
        self.bus(wires)
    }

    pub fn or_buses(&mut self, a: &[GateId], b: &[GateId]) -> Result<Bus> {
        if a.len() != b.len() {
            return Err(Error::Construction(format!(
                "or width mismatch: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        let wires = a.iter().zip(b).map(|(&x, &y)| self.or(x, y)).collect();
        Ok(self.bus(wires))
    }

    /// `(bus + add) mod 2^wrap_width`; the bus is zero-extended or truncated
    /// to `wrap_width` first.
    pub fn affine(&mut self, bus: &[GateId], add: &BigInt, wrap_width: usize) -> Result<Bus> {
        let modulus = BigInt::one() << wrap_width;
        if add.magnitude().bits() as usize > wrap_width {
            return Err(Error::Construction(format!(
                "affine constant {add} out of range for {wrap_width} bits"
            )));
        }
        let k = ((add % &modulus) + &modulus) % &modulus;
        let k = k.to_biguint().expect("reduced modulo a positive modulus");
        let a = self.resize(bus, wrap_width);
        let mut carry = self.constant(false);
        let mut wires = Vec::with_capacity(wrap_width);
        for (i, &x) in a.iter().enumerate() {
            let sum = self.xor(x, carry);
            if k.bit(i as u64) {
                wires.push(self.not(sum));
                carry = self.or(x, carry);
            } else {
                wires.push(sum);
                carry = self.and(x, carry);
            }
        }
        Ok(self.bus(wires))
    }

    pub fn add_small(&mut self, bus: &[GateId], add: i64) -> Result<Bus> {
        let w = bus.len();
        self.affine(bus, &BigInt::from(add), w)
    }

    /// Ripple-carry `a + b + carry_in` modulo `2^|a|`.
    fn add_carry(&mut self, a: &[GateId], b: &[GateId], carry_in: bool) -> Result<Bus> {
        if a.len() != b.len() {
            return Err(Error::Construction(format!(
                "adder width mismatch: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        let mut carry = self.constant(carry_in);
        let mut wires = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let half = self.xor(x, y);
            wires.push(self.xor(half, carry));
            let gen = self.and(x, y);
            let prop = self.and(half, carry);
            carry = self.or(gen, prop);
        }
        Ok(self.bus(wires))
    }

    pub fn add(&mut self, a: &[GateId], b: &[GateId]) -> Result<Bus> {
        self.add_carry(a, b, false)
    }

    /// `a - b` modulo `2^|a|`, as `a + !b + 1`.
    pub fn sub(&mut self, a: &[GateId], b: &[GateId]) -> Result<Bus> {
        let nb: Vec<GateId> = b.iter().map(|&w| self.not(w)).collect();
        let nb = self.bus(nb);
        self.add_carry(a, &nb, true)
    }

    /// `bus * factor` modulo `2^width` by shift-and-add over the set bits of
    /// `factor`.
    pub fn mul_const(&mut self, bus: &[GateId], factor: &BigUint, width: usize) -> Result<Bus> {
        let zero = self.constant(false);
        let mut acc = self.bus(vec![zero; width]);
        for shift in 0..bit_len(factor).min(width) {
            if !factor.bit(shift as u64) {
                continue;
            }
            let shifted: Vec<GateId> = (0..width)
                .map(|k| if k < shift { zero } else { bus.get(k - shift).copied().unwrap_or(zero) })
                .collect();
            acc = if acc.iter().all(|&w| w == zero) {
                self.bus(shifted)
            } else {
                self.add(&acc, &shifted)?
            };
        }
        Ok(acc)
    }

    /// Long division by a constant, most-significant bit first, with a
    /// running remainder of `bitlen(divisor)` bits. Returns
    /// `(quotient, remainder)` with widths `|bus|` and `bitlen(divisor)`.
    pub fn div_const(&mut self, bus: &[GateId], divisor: &BigUint) -> Result<(Bus, Bus)> {
        if divisor.is_zero() {
            return Err(Error::Construction("division by zero".into()));
        }
        let r = bit_len(divisor);
        let neg_divisor = BigInt::from_biguint(Sign::Minus, divisor.clone());
        let zero = self.constant(false);
        let mut rem = self.bus(vec![zero; r]);
        let mut quotient = vec![zero; bus.len()];
        for k in (0..bus.len()).rev() {
            let mut shifted = Vec::with_capacity(r + 1);
            shifted.push(bus[k]);
            shifted.extend_from_slice(&rem);
            let fits = self.ge_const(&shifted, divisor)?;
            let reduced = self.affine(&shifted, &neg_divisor, r + 1)?;
            rem = self.mux(fits, &reduced[..r], &shifted[..r])?;
            quotient[k] = fits;
        }
        let quotient = self.bus(quotient);
        Ok((quotient, rem))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{BitWord, Circuit, CircuitSink};

    /// Builds a circuit from a single-input-bus combinator; the combinator
    /// runs twice, once to learn its output count.
    fn unary(width: usize, f: impl Fn(&mut Emitter<CircuitSink>, &Bus) -> Vec<GateId>) -> Circuit {
        let mut e = Emitter::new(CircuitSink::default(), width, probe_outputs(width, &f)).unwrap();
        let bus = e.input_bus(width).unwrap();
        let outs = f(&mut e, &bus);
        e.output_bus(&outs).unwrap();
        e.finish().unwrap()
    }

    fn probe_outputs(
        width: usize,
        f: &impl Fn(&mut Emitter<CircuitSink>, &Bus) -> Vec<GateId>,
    ) -> usize {
        let mut e = Emitter::new(CircuitSink::default(), width, 0).unwrap();
        let bus = e.input_bus(width).unwrap();
        f(&mut e, &bus).len()
    }

    fn run(c: &Circuit, v: u64) -> u64 {
        c.evaluate(&BitWord::from_u64(v, c.input_count()))
            .unwrap()
            .to_u64()
            .unwrap()
    }

    #[test]
    fn comparator_examples() {
        let c = unary(4, |e, b| vec![e.comparator_const(b, &7u32.into()).unwrap()]);
        assert_eq!(run(&c, 5), 1);
        assert_eq!(run(&c, 3), 1);
        assert_eq!(run(&c, 7), 0);
    }

    #[test]
    fn comparator_exhaustive() {
        for w in 1..=8usize {
            for t in 0..(1u64 << w) {
                let c = unary(w, |e, b| vec![e.comparator_const(b, &t.into()).unwrap()]);
                for v in 0..(1u64 << w) {
                    assert_eq!(run(&c, v), (v < t) as u64, "w={w} t={t} v={v}");
                }
            }
        }
    }

    #[test]
    fn comparator_out_of_range() {
        let mut e = Emitter::new(CircuitSink::default(), 3, 0).unwrap();
        let b = e.input_bus(3).unwrap();
        assert!(e.comparator_const(&b, &8u32.into()).is_err());
    }

    #[test]
    fn division_examples_and_exhaustive() {
        for d in 1..=9u64 {
            let c = unary(8, |e, b| {
                let (q, r) = e.div_const(b, &d.into()).unwrap();
                let mut out = q.to_vec();
                out.extend(e.resize(&r, 4).iter());
                out
            });
            for v in 0..256u64 {
                let out = run(&c, v);
                let (q, r) = (out & 0xff, out >> 8);
                assert_eq!((q, r), (v / d, v % d), "v={v} d={d}");
                assert!(r < d);
            }
        }
        let c = unary(4, |e, b| {
            let (q, r) = e.div_const(b, &3u32.into()).unwrap();
            let mut out = q.to_vec();
            out.extend(r.iter());
            out
        });
        assert_eq!(run(&c, 13), 4 | (1 << 4));
        let c = unary(4, |e, b| {
            let (q, r) = e.div_const(b, &5u32.into()).unwrap();
            let mut out = q.to_vec();
            out.extend(r.iter());
            out
        });
        assert_eq!(run(&c, 0), 0);
    }

    #[test]
    fn division_by_zero_rejected() {
        let mut e = Emitter::new(CircuitSink::default(), 3, 0).unwrap();
        let b = e.input_bus(3).unwrap();
        assert!(e.div_const(&b, &BigUint::zero()).is_err());
    }

    #[test]
    fn affine_examples_and_exhaustive() {
        let sub2 = unary(4, |e, b| e.affine(b, &BigInt::from(-2), 4).unwrap().to_vec());
        assert_eq!(run(&sub2, 5), 3);
        let sub1 = unary(4, |e, b| e.affine(b, &BigInt::from(-1), 4).unwrap().to_vec());
        assert_eq!(run(&sub1, 0), 15);
        for add in -15i64..=15 {
            let c = unary(4, |e, b| e.affine(b, &BigInt::from(add), 4).unwrap().to_vec());
            for v in 0..16i64 {
                assert_eq!(run(&c, v as u64) as i64, (v + add).rem_euclid(16), "v={v} add={add}");
            }
        }
        let add6 = unary(4, |e, b| e.affine(b, &BigInt::from(6), 4).unwrap().to_vec());
        assert_eq!(run(&add6, 9), 15);
    }

    #[test]
    fn mul_add_sub_exhaustive() {
        for k in 0..12u64 {
            let c = unary(6, |e, b| e.mul_const(b, &k.into(), 6).unwrap().to_vec());
            for v in 0..64 {
                assert_eq!(run(&c, v), (v * k) % 64);
            }
        }
        let c = unary(8, |e, b| {
            let (lo, hi) = b.split_at(4);
            let s = e.add(lo, hi).unwrap();
            let d = e.sub(lo, hi).unwrap();
            let lt = e.less_than(lo, hi).unwrap();
            let mut out = s.to_vec();
            out.extend(d.iter());
            out.push(lt);
            out
        });
        for v in 0..256u64 {
            let (a, b) = (v & 15, v >> 4);
            let out = run(&c, v);
            assert_eq!(out & 15, (a + b) % 16);
            assert_eq!((out >> 4) & 15, (a + 16 - b) % 16);
            assert_eq!(out >> 8, (a < b) as u64);
        }
    }

    #[test]
    fn mux_examples() {
        let c = unary(9, |e, b| {
            let sel = b[8];
            e.mux(sel, &b[0..4], &b[4..8]).unwrap().to_vec()
        });
        let a = 0b0110u64;
        let bb = 0b1001u64;
        assert_eq!(run(&c, (1 << 8) | (bb << 4) | a), 0b0110);
        assert_eq!(run(&c, (bb << 4) | a), 0b1001);
        assert_eq!(run(&c, (1 << 8) | (0b1111 << 4) | 0b1111), 0b1111);
        assert_eq!(run(&c, (0b1111 << 4) | 0b1111), 0b1111);
    }

    #[test]
    fn mux_width_mismatch() {
        let mut e = Emitter::new(CircuitSink::default(), 5, 0).unwrap();
        let b = e.input_bus(5).unwrap();
        assert!(e.mux(b[0], &b[1..3], &b[2..5]).is_err());
    }

    #[test]
    fn eq_const_exhaustive() {
        for t in 0..20u64 {
            let c = unary(4, |e, b| vec![e.eq_small(b, t)]);
            for v in 0..16 {
                assert_eq!(run(&c, v), (v == t) as u64);
            }
        }
    }
}
