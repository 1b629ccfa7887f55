// SPDX-License-Identifier: Apache-2.0

//! Subcircuits shared by both compilers.
//!
//! Configuration labels follow the canonical allocation: with `g'_j` the
//! vertices of `G_j` outside all ports,
//!
//! ```text
//! [0, B1)        G2 without P'3                   B1 = g'2 + k2
//! [B1, B2)       2^s formula copies, W1 each      W1 = g'1 + k2
//! [B2, B3)       L padding copies, W4 each        W4 = g'4 + k2
//! [B3, T - k3)   the tail copy without P'1, P'3
//! [T - k3, T)    the shared ports P'3
//! ```
//!
//! Every copy after the first starts with its interior and ends with its
//! `P'2` block, which doubles as the next copy's `P'1`. Buses are `W` bits
//! wide and all arithmetic wraps modulo `2^W`; lanes that are never selected
//! may carry wrapped values, which lie far outside every gadget and so never
//! match a lookup.

mod det;
mod nondet;

pub use det::{compile_det, compile_det_to};
pub use nondet::{compile_nondet, compile_nondet_to, max_bus};

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use serde::Serialize;

use crate::circuit::{BitWord, Bus, Circuit, CircuitSink, Emitter, Gate, GateId, GateSink, Scratch};
use crate::error::{Error, Result};
use crate::glue::{BoundariedGraph, ExplicitDynamics, GadgetKind, GammaSpec};
use crate::instance::ReductionInstance;
use crate::sat::PropFormula;
use crate::sizing::ceil_log2;

/// Which part of the word a copy belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopyType {
    /// `H0 = G2`.
    Head,
    /// `H1 … H_{2^s}`, each `G0` or `G1` depending on the formula.
    Formula,
    /// The `L` copies of `G4`.
    Padding,
    /// The final `G3`.
    Tail,
}

impl CopyType {
    pub const ALL: [CopyType; 4] = [CopyType::Head, CopyType::Formula, CopyType::Padding, CopyType::Tail];

    /// A gadget with this copy type's size and port layout.
    pub fn representative(self) -> GadgetKind {
        match self {
            CopyType::Head => GadgetKind::G2,
            CopyType::Formula => GadgetKind::G0,
            CopyType::Padding => GadgetKind::G4,
            CopyType::Tail => GadgetKind::G3,
        }
    }
}

/// Instance constants used by the label arithmetic.
#[derive(Debug, Clone)]
pub struct Layout {
    /// Internal bus width `W`.
    pub width: usize,
    /// `⌈log₂ T⌉`, the configuration width at the circuit boundary.
    pub config_bits: usize,
    pub total: BigUint,
    pub formula_copies: BigUint,
    pub padding: BigUint,
    pub k2: usize,
    pub k3: usize,
    /// `g'2`, the first label of G2's `P'2` block.
    pub head_ports: BigUint,
    pub head_end: BigUint,
    pub formula_width: BigUint,
    pub formula_end: BigUint,
    pub padding_width: BigUint,
    pub padding_end: BigUint,
    pub shared_start: BigUint,
    pub last_index: BigUint,
    sizes: [usize; 4],
}

impl Layout {
    pub fn new(inst: &ReductionInstance) -> Layout {
        let gamma = inst.gamma();
        let sizes = inst.sizes();
        let k2 = gamma.k2();
        let k3 = gamma.k3();
        let size = |t: CopyType| gamma.graph(t.representative()).size();
        let head_ports = BigUint::from(size(CopyType::Head) - k2 - k3);
        let head_end = &head_ports + k2;
        let formula_width = BigUint::from(gamma.copy_width(GadgetKind::G1));
        let padding_width = BigUint::from(gamma.copy_width(GadgetKind::G4));
        let formula_end = &head_end + &sizes.two_pow_s * &formula_width;
        let padding_end = &formula_end + &sizes.l * &padding_width;
        let last_index = &sizes.two_pow_s + &sizes.l + 1u32;
        let span = (&sizes.total).max(&(&last_index + 1u32)).clone();
        Layout {
            width: ceil_log2(&span) + 2,
            config_bits: sizes.config_bits(),
            total: sizes.total.clone(),
            formula_copies: sizes.two_pow_s.clone(),
            padding: sizes.l.clone(),
            k2,
            k3,
            head_ports,
            head_end,
            formula_width,
            formula_end,
            padding_width,
            padding_end,
            shared_start: &sizes.total - k3,
            last_index,
            sizes: CopyType::ALL.map(size),
        }
    }

    pub fn size(&self, t: CopyType) -> usize {
        self.sizes[t as usize]
    }

    /// Reserves the constants above on the emitter's meter.
    pub fn charge<S: GateSink>(&self, e: &Emitter<S>) -> Scratch {
        let big = [
            &self.total,
            &self.formula_copies,
            &self.padding,
            &self.head_ports,
            &self.head_end,
            &self.formula_width,
            &self.formula_end,
            &self.padding_width,
            &self.padding_end,
            &self.shared_start,
            &self.last_index,
        ];
        let bytes: usize = big.iter().map(|v| (v.bits() as usize).div_ceil(8)).sum();
        e.scratch(bytes + 8 * std::mem::size_of::<usize>())
    }

    /// `v mod 2^W` as a non-negative constant.
    fn wrap(&self, v: BigInt) -> BigInt {
        let m = BigInt::one() << self.width;
        ((v % &m) + &m) % m
    }

    /// Constant added to `c - idx·width` (or to `v + idx·width`) for the
    /// chained copy types: relative is `c - g'2 - (idx - first)·width - base`.
    fn chain_offset(&self, t: CopyType) -> (BigUint, BigInt) {
        let g2p = BigInt::from(self.head_ports.clone());
        match t {
            CopyType::Formula => {
                let w = BigInt::from(self.formula_width.clone());
                (self.formula_width.clone(), w - g2p)
            }
            CopyType::Padding => {
                let w1 = BigInt::from(self.formula_width.clone());
                let w4 = BigInt::from(self.padding_width.clone());
                let d = BigInt::from(self.formula_copies.clone());
                (self.padding_width.clone(), (&d + 1) * w4 - g2p - d * w1)
            }
            _ => unreachable!("only chained copies use an index"),
        }
    }
}

/// Output of numcopy on one configuration.
pub struct CopyOf {
    /// `W`-bit copy index.
    pub index: Bus,
    /// Set when the configuration is a secondary port of its copy.
    pub secondary: GateId,
    /// Set when the configuration is one of the shared `P'3` ports.
    pub shared: GateId,
}

/// Smallest copy index containing `c` (a `W`-bit bus), and the port flags.
pub fn numcopy<S: GateSink>(e: &mut Emitter<S>, lay: &Layout, c: &[GateId]) -> Result<CopyOf> {
    let w = lay.width;
    let shared = e.ge_const(c, &lay.shared_start)?;
    let below_head = e.comparator_const(c, &lay.head_end)?;
    let below_formula = e.comparator_const(c, &lay.formula_end)?;
    let below_padding = e.comparator_const(c, &lay.padding_end)?;
    let not_head = e.not(below_head);
    let in_formula = e.and(not_head, below_formula);
    let not_formula = e.not(below_formula);
    let in_padding = e.and(not_formula, below_padding);
    let not_padding = e.not(below_padding);
    let not_shared = e.not(shared);
    let in_tail = e.and(not_padding, not_shared);

    let from_formula = e.affine(c, &-BigInt::from(lay.head_end.clone()), w)?;
    let (q1, r1) = e.div_const(&from_formula, &lay.formula_width)?;
    let idx1 = e.add_small(&q1, 1)?;
    let from_padding = e.affine(c, &-BigInt::from(lay.formula_end.clone()), w)?;
    let (q4, r4) = e.div_const(&from_padding, &lay.padding_width)?;
    let idx4 = e.affine(&q4, &BigInt::from(&lay.formula_copies + 1u32), w)?;
    let idx3 = e.const_bus(&lay.last_index, w);

    let a = e.mask(in_formula, &idx1);
    let b = e.mask(in_padding, &idx4);
    let ab = e.or_buses(&a, &b)?;
    let t = e.mask(in_tail, &idx3);
    let index = e.or_buses(&ab, &t)?;

    let head_port = e.ge_const(c, &lay.head_ports)?;
    let head_port = e.and(below_head, head_port);
    let formula_port = e.ge_const(&r1, &(&lay.formula_width - lay.k2))?;
    let formula_port = e.and(in_formula, formula_port);
    let padding_port = e.ge_const(&r4, &(&lay.padding_width - lay.k2))?;
    let padding_port = e.and(in_padding, padding_port);
    let secondary = e.or_all([shared, head_port, formula_port, padding_port]);
    Ok(CopyOf {
        index,
        secondary,
        shared,
    })
}

/// Label of configuration `c` inside a copy of type `t` at index `idx`.
pub fn relative<S: GateSink>(
    e: &mut Emitter<S>,
    lay: &Layout,
    t: CopyType,
    idx: &[GateId],
    c: &[GateId],
    shared: GateId,
) -> Result<Bus> {
    let w = lay.width;
    let g = BigInt::from(lay.size(t));
    let as_shared = e.affine(c, &lay.wrap(g - BigInt::from(lay.total.clone())), w)?;
    let own = match t {
        CopyType::Head => e.resize(c, w),
        CopyType::Formula | CopyType::Padding => {
            let (step, offset) = lay.chain_offset(t);
            let scaled = e.mul_const(idx, &step, w)?;
            let diff = e.sub(c, &scaled)?;
            e.affine(&diff, &lay.wrap(offset), w)?
        }
        CopyType::Tail => {
            let add = BigInt::from(lay.k2) - BigInt::from(lay.padding_end.clone());
            e.affine(c, &lay.wrap(add), w)?
        }
    };
    e.mux(shared, &as_shared, &own)
}

/// Inverse of [`relative`]: configuration of local label `v`.
pub fn absolute<S: GateSink>(
    e: &mut Emitter<S>,
    lay: &Layout,
    t: CopyType,
    idx: &[GateId],
    v: &[GateId],
) -> Result<Bus> {
    let w = lay.width;
    let g = lay.size(t);
    let shared = e.ge_const(v, &BigUint::from(g - lay.k3))?;
    let as_shared = e.affine(v, &lay.wrap(BigInt::from(lay.total.clone()) - g), w)?;
    let own = match t {
        CopyType::Head => e.resize(v, w),
        CopyType::Formula | CopyType::Padding => {
            let (step, offset) = lay.chain_offset(t);
            let scaled = e.mul_const(idx, &step, w)?;
            let sum = e.add(v, &scaled)?;
            e.affine(&sum, &lay.wrap(-offset), w)?
        }
        CopyType::Tail => {
            let add = BigInt::from(lay.padding_end.clone()) - lay.k2;
            e.affine(v, &lay.wrap(add), w)?
        }
    };
    e.mux(shared, &as_shared, &own)
}

/// Successor lookup in a gadget of out-degree at most one: `(out, z)` with
/// `z = 1` and `out = 0` when `v` has no successor.
pub fn successor_lookup<S: GateSink>(
    e: &mut Emitter<S>,
    graph: &BoundariedGraph,
    v: &[GateId],
) -> Result<(Bus, GateId)> {
    let width = v.len();
    let zero = e.constant(false);
    let mut out = vec![zero; width];
    let mut any = zero;
    for u in 0..graph.size() {
        let Some(target) = graph.successor(u) else {
            if graph.out_degree(u) > 1 {
                return Err(crate::error::Error::Construction(format!(
                    "vertex {u} has out-degree {} in a deterministic lookup",
                    graph.out_degree(u)
                )));
            }
            continue;
        };
        let hit = e.eq_small(v, u as u64);
        any = e.or(any, hit);
        for (k, slot) in out.iter_mut().enumerate() {
            if k < usize::BITS as usize && target >> k & 1 == 1 {
                *slot = e.or(*slot, hit);
            }
        }
    }
    let z = e.not(any);
    Ok((e.bus(out), z))
}

/// One bit: `(v, v2)` is an arc of `graph`.
pub fn arc_lookup<S: GateSink>(e: &mut Emitter<S>, graph: &BoundariedGraph, v: &[GateId], v2: &[GateId]) -> GateId {
    let mut bit = e.constant(false);
    let mut last: Option<(usize, GateId)> = None;
    for &(a, b) in graph.arcs() {
        let from = match last {
            Some((u, id)) if u == a => id,
            _ => {
                let id = e.eq_small(v, a as u64);
                last = Some((a, id));
                id
            }
        };
        let to = e.eq_small(v2, b as u64);
        let both = e.and(from, to);
        bit = e.or(bit, both);
    }
    bit
}

/// Value of the formula at assignment `idx - 1`; with `clamp_zero`, index 0
/// evaluates assignment 0 instead of the wrapped value.
fn formula_at<S: GateSink>(
    e: &mut Emitter<S>,
    lay: &Layout,
    formula: &PropFormula,
    idx: &[GateId],
    clamp_zero: bool,
) -> Result<GateId> {
    let prev = e.add_small(idx, -1)?;
    let assignment = if clamp_zero {
        let is_zero = e.eq_small(idx, 0);
        let keep = e.not(is_zero);
        e.mask(keep, &prev[..formula.vars()])
    } else {
        e.bus(prev[..formula.vars()].to_vec())
    };
    debug_assert!(lay.width >= formula.vars());
    formula.compile(e, &assignment)
}

/// Successor inside formula copy `idx`: `G0` where the formula holds at
/// `idx - 1`, `G1` otherwise.
pub fn formula_successor<S: GateSink>(
    e: &mut Emitter<S>,
    lay: &Layout,
    gamma: &GammaSpec,
    formula: &PropFormula,
    idx: &[GateId],
    v: &[GateId],
) -> Result<(Bus, GateId)> {
    let holds = formula_at(e, lay, formula, idx, false)?;
    let (out0, z0) = successor_lookup(e, gamma.graph(GadgetKind::G0), v)?;
    let (out1, z1) = successor_lookup(e, gamma.graph(GadgetKind::G1), v)?;
    let out = e.mux(holds, &out0, &out1)?;
    let z = e.mux(holds, &[z0], &[z1])?;
    Ok((out, z[0]))
}

/// Adjacency inside formula copy `idx`, same polarity as
/// [`formula_successor`]; index 0 reads assignment 0.
pub fn formula_arc<S: GateSink>(
    e: &mut Emitter<S>,
    lay: &Layout,
    gamma: &GammaSpec,
    formula: &PropFormula,
    idx: &[GateId],
    v: &[GateId],
    v2: &[GateId],
) -> Result<GateId> {
    let holds = formula_at(e, lay, formula, idx, true)?;
    let b0 = arc_lookup(e, gamma.graph(GadgetKind::G0), v, v2);
    let b1 = arc_lookup(e, gamma.graph(GadgetKind::G1), v, v2);
    let out = e.mux(holds, &[b0], &[b1])?;
    Ok(out[0])
}

/// Emission statistics.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CompileStats {
    pub gates: usize,
    pub wires: usize,
    pub peak_workspace_bytes: usize,
    #[serde(serialize_with = "as_seconds")]
    pub emission_time: Duration,
}

fn as_seconds<Ser: serde::Serializer>(d: &Duration, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
    s.serialize_f64(d.as_secs_f64())
}

/// Forwards gates while counting them.
struct Tally<S> {
    inner: S,
    gates: usize,
    wires: usize,
}

impl<S: GateSink> GateSink for Tally<S> {
    type Output = S::Output;

    fn begin(&mut self, input_count: usize, output_count: usize) -> Result<()> {
        self.inner.begin(input_count, output_count)
    }

    fn push(&mut self, id: GateId, gate: Gate) -> Result<()> {
        self.gates += 1;
        self.wires += gate.args().count();
        self.inner.push(id, gate)
    }

    fn finish(self, output_order: &[GateId]) -> Result<S::Output> {
        self.inner.finish(output_order)
    }
}

/// Runs `body` on a fresh emitter over `sink` and collects statistics.
fn emit_with<S: GateSink>(
    sink: S,
    inputs: usize,
    outputs: usize,
    body: impl FnOnce(&mut Emitter<Tally<S>>) -> Result<()>,
) -> Result<(S::Output, CompileStats)> {
    let start = Instant::now();
    let tally = Tally {
        inner: sink,
        gates: 0,
        wires: 0,
    };
    let mut e = Emitter::new(tally, inputs, outputs)?;
    body(&mut e)?;
    let peak = e.peak_workspace();
    let gates = e.gate_count();
    let wires = e.sink_ref().wires;
    let out = e.finish()?;
    Ok((
        out,
        CompileStats {
            gates,
            wires,
            peak_workspace_bytes: peak,
            emission_time: start.elapsed(),
        },
    ))
}

/// Result of comparing the label circuits with an oracle's copy maps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelCheck {
    /// `(copy, local)` pairs checked.
    pub lanes: usize,
    pub failures: Vec<String>,
}

pub(crate) fn copy_type_of(kind: GadgetKind) -> CopyType {
    match kind {
        GadgetKind::G2 => CopyType::Head,
        GadgetKind::G0 | GadgetKind::G1 => CopyType::Formula,
        GadgetKind::G4 => CopyType::Padding,
        GadgetKind::G3 => CopyType::Tail,
    }
}

/// Circuit with inputs `(idx, c, v)` and outputs `relative(t, idx, c)`,
/// `absolute(t, idx, v)` and `absolute(t, idx, relative(t, idx, c))`, all
/// `W` bits wide.
pub fn label_circuit(lay: &Layout, t: CopyType) -> Result<Circuit> {
    let w = lay.width;
    let mut e = Emitter::new(CircuitSink::default(), 3 * w, 3 * w)?;
    let input = e.input_bus(3 * w)?;
    let (idx, rest) = input.split_at(w);
    let (c, v) = rest.split_at(w);
    let shared = e.ge_const(c, &lay.shared_start)?;
    let rel = relative(&mut e, lay, t, idx, c, shared)?;
    let abs = absolute(&mut e, lay, t, idx, v)?;
    let round = absolute(&mut e, lay, t, idx, &rel)?;
    e.output_bus(&rel)?;
    e.output_bus(&abs)?;
    e.output_bus(&round)?;
    drop(input);
    e.finish()
}

/// For every copy `i` of type `t` and local label `v` holding configuration
/// `c`, checks `relative(t, i, c) = v`, `absolute(t, i, v) = c` and
/// `absolute(t, i, relative(t, i, c)) = c` on the compiled label circuits.
pub fn check_label_maps(inst: &ReductionInstance, oracle: &ExplicitDynamics) -> Result<LabelCheck> {
    let lay = Layout::new(inst);
    let w = lay.width;
    let circuits = CopyType::ALL.map(|t| label_circuit(&lay, t));
    let mut lanes = 0;
    let mut failures = Vec::new();
    for (copy, &kind) in oracle.word().iter().enumerate() {
        let t = copy_type_of(kind);
        let circuit = circuits[t as usize].as_ref().map_err(|e| Error::Construction(e.to_string()))?;
        for (v, &c) in oracle.copy_map(copy).iter().enumerate() {
            let word = BigUint::from(copy) | (BigUint::from(c) << w) | (BigUint::from(v) << (2 * w));
            let out = circuit.evaluate(&BitWord::from_biguint(&word, 3 * w))?.to_biguint();
            let mask = (BigUint::one() << w) - 1u32;
            let part = |k: usize| (&out >> (k * w)) & &mask;
            let (rel, abs, round) = (part(0), part(1), part(2));
            lanes += 1;
            if rel != BigUint::from(v) || abs != BigUint::from(c) || round != BigUint::from(c) {
                failures.push(format!(
                    "copy {copy} ({kind}) local {v} config {c}: relative {rel}, absolute {abs}, round trip {round}"
                ));
            }
        }
    }
    Ok(LabelCheck { lanes, failures })
}
