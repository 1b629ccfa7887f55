// SPDX-License-Identifier: Apache-2.0

//! The circuit computing `F(c)`.
//!
//! numcopy feeds seven pipelines (relative, gadget, absolute) for the copy
//! types at index `i` and `i + 1`; select keeps one candidate.

use num_traits::Zero;

use super::{absolute, emit_with, formula_successor, numcopy, relative, successor_lookup, CompileStats, CopyType, Layout};
use crate::circuit::{Bus, Circuit, CircuitSink, Emitter, GateId, GateSink};
use crate::error::Result;
use crate::instance::{Mode, ReductionInstance};

/// Candidate successor and "no arc here" bit of one pipeline.
pub(crate) struct Candidate {
    pub next: Bus,
    pub none: GateId,
}

pub(crate) fn pipeline<S: GateSink>(
    e: &mut Emitter<S>,
    lay: &Layout,
    inst: &ReductionInstance,
    t: CopyType,
    idx: &[GateId],
    c: &[GateId],
    shared: GateId,
) -> Result<Candidate> {
    let v = relative(e, lay, t, idx, c, shared)?;
    let gamma = inst.gamma();
    let (local, none) = match t {
        CopyType::Formula => formula_successor(e, lay, gamma, inst.formula(), idx, &v)?,
        other => successor_lookup(e, gamma.graph(other.representative()), &v)?,
    };
    drop(v);
    let next = absolute(e, lay, t, idx, &local)?;
    Ok(Candidate { next, none })
}

/// The status bits select reads.
pub(crate) struct Bands {
    /// `i = 0` and `c` outside `P'3`.
    pub head: GateId,
    /// `1 ≤ i ≤ 2^s`, and the `i = 2^s` / `i < 2^s` split.
    pub formula: GateId,
    pub formula_last: GateId,
    /// `2^s < i ≤ 2^s + L`, and the `i = 2^s + L` split.
    pub padding: GateId,
    pub padding_last: GateId,
    pub tail: GateId,
}

pub(crate) fn bands<S: GateSink>(e: &mut Emitter<S>, lay: &Layout, i: &[GateId], shared: GateId) -> Result<Bands> {
    let zero = e.eq_small(i, 0);
    let not_shared = e.not(shared);
    let head = e.and(zero, not_shared);
    let upto_formula = e.comparator_const(i, &(&lay.formula_copies + 1u32))?;
    let nonzero = e.not(zero);
    let formula = e.and(nonzero, upto_formula);
    let formula_last = e.eq_const(i, &lay.formula_copies);
    let upto_padding = e.comparator_const(i, &(&lay.formula_copies + &lay.padding + 1u32))?;
    let past_formula = e.not(upto_formula);
    let padding = e.and(past_formula, upto_padding);
    let padding_last = if lay.padding.is_zero() {
        e.constant(false)
    } else {
        e.eq_const(i, &(&lay.formula_copies + &lay.padding))
    };
    let tail = e.eq_const(i, &lay.last_index);
    Ok(Bands {
        head,
        formula,
        formula_last,
        padding,
        padding_last,
        tail,
    })
}

/// The twelve-line case split choosing the successor.
#[allow(clippy::too_many_arguments)]
fn select<S: GateSink>(
    e: &mut Emitter<S>,
    lay: &Layout,
    b: &Bands,
    secondary: GateId,
    shared: GateId,
    at: [&Candidate; 4],
    next: [&Candidate; 3],
) -> Result<Bus> {
    let [head_i, formula_i, padding_i, tail_i] = at;
    let [formula_n, padding_n, tail_n] = next;
    let hand_on = |e: &mut Emitter<S>, none: GateId| e.and(secondary, none);
    let mut lines: Vec<(GateId, &Bus)> = Vec::with_capacity(12);

    let head_on = hand_on(e, head_i.none);
    let head_stay = e.not(head_on);
    lines.push((e.and(b.head, head_stay), &head_i.next));
    lines.push((e.and(b.head, head_on), &formula_n.next));

    let formula_on = hand_on(e, formula_i.none);
    let formula_stay = e.not(formula_on);
    let not_last = e.not(b.formula_last);
    let formula_inner = e.and(b.formula, not_last);
    lines.push((e.and(b.formula, formula_stay), &formula_i.next));
    lines.push((e.and(formula_inner, formula_on), &formula_n.next));
    let after_formula = if lay.padding.is_zero() { tail_n } else { padding_n };
    lines.push((e.and(b.formula_last, formula_on), &after_formula.next));

    if !lay.padding.is_zero() {
        let padding_on = hand_on(e, padding_i.none);
        let padding_stay = e.not(padding_on);
        let not_last = e.not(b.padding_last);
        let padding_inner = e.and(b.padding, not_last);
        lines.push((e.and(b.padding, padding_stay), &padding_i.next));
        lines.push((e.and(padding_inner, padding_on), &padding_n.next));
        lines.push((e.and(b.padding_last, padding_on), &tail_n.next));
    }

    lines.push((b.tail, &tail_i.next));

    let head_has = e.not(head_i.none);
    lines.push((e.and(shared, head_has), &head_i.next));
    let shared_on = e.and(shared, head_i.none);
    let padding_has = e.not(padding_n.none);
    lines.push((e.and(shared_on, padding_has), &padding_n.next));
    lines.push((e.and(shared_on, padding_n.none), &tail_n.next));

    let zero = e.constant(false);
    let mut acc = e.bus(vec![zero; lay.width]);
    for (cond, bus) in lines {
        let part = e.mask(cond, bus);
        acc = e.or_buses(&acc, &part)?;
    }
    Ok(acc)
}

/// Streams the deterministic circuit into `sink`.
pub fn compile_det_to<S: GateSink>(inst: &ReductionInstance, sink: S) -> Result<(S::Output, CompileStats)> {
    let lay = Layout::new(inst);
    let n = lay.config_bits;
    emit_with(sink, n, n, |e| {
        let _constants = lay.charge(e);
        let input = e.input_bus(n)?;
        let c = e.resize(&input, lay.width);
        drop(input);
        let at = numcopy(e, &lay, &c)?;
        let i = &at.index;
        let i_next = e.add_small(i, 1)?;
        let shared = at.shared;

        let mut cands = Vec::with_capacity(7);
        for t in CopyType::ALL {
            cands.push(pipeline(e, &lay, inst, t, i, &c, shared)?);
        }
        for t in [CopyType::Formula, CopyType::Padding, CopyType::Tail] {
            cands.push(pipeline(e, &lay, inst, t, &i_next, &c, shared)?);
        }
        let b = bands(e, &lay, i, shared)?;
        let out = select(
            e,
            &lay,
            &b,
            at.secondary,
            shared,
            [&cands[0], &cands[1], &cands[2], &cands[3]],
            [&cands[4], &cands[5], &cands[6]],
        )?;
        e.output_bus(&out[..n])
    })
}

pub fn compile_det(inst: &ReductionInstance) -> Result<Circuit> {
    debug_assert_eq!(inst.mode(), Mode::Deterministic);
    compile_det_to(inst, CircuitSink::default()).map(|(c, _)| c)
}
