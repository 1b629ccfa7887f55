// SPDX-License-Identifier: Apache-2.0

//! The circuit computing the adjacency bit of `(c, c')`.
//!
//! Both endpoints go through numcopy. With `m = max(i, i')`, seven
//! adjacency lanes look the pair up in the copy types at `m` and `m + 1`,
//! and a case split on `(i, i', p, p')` keeps the lanes that can hold the arc.
//!
//! Two refinements over the plain case table: pairs whose larger index is the
//! tail copy always consult the tail lane (covering tail arcs into the
//! previous copy's secondary ports and arcs between `P'3` and the tail), and
//! with `L = 0` the padding lanes are never read.

use num_traits::Zero;

use super::{arc_lookup, emit_with, formula_arc, numcopy, relative, CompileStats, CopyType, Layout};
use crate::circuit::{Bus, Circuit, CircuitSink, Emitter, GateId, GateSink};
use crate::error::Result;
use crate::instance::ReductionInstance;

/// `max(a, b)` for equal-width buses.
pub fn max_bus<S: GateSink>(e: &mut Emitter<S>, a: &[GateId], b: &[GateId]) -> Result<Bus> {
    let lt = e.less_than(a, b)?;
    e.mux(lt, b, a)
}

pub(crate) fn eq_bus<S: GateSink>(e: &mut Emitter<S>, a: &[GateId], b: &[GateId]) -> GateId {
    let mut acc = e.constant(true);
    for (&x, &y) in a.iter().zip(b) {
        let d = e.xor(x, y);
        let same = e.not(d);
        acc = e.and(acc, same);
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn adjacency<S: GateSink>(
    e: &mut Emitter<S>,
    lay: &Layout,
    inst: &ReductionInstance,
    t: CopyType,
    idx: &[GateId],
    c: &[GateId],
    shared: GateId,
    c2: &[GateId],
    shared2: GateId,
) -> Result<GateId> {
    let v = relative(e, lay, t, idx, c, shared)?;
    let v2 = relative(e, lay, t, idx, c2, shared2)?;
    let gamma = inst.gamma();
    match t {
        CopyType::Formula => formula_arc(e, lay, gamma, inst.formula(), idx, &v, &v2),
        other => Ok(arc_lookup(e, gamma.graph(other.representative()), &v, &v2)),
    }
}

/// Streams the non-deterministic circuit into `sink`: `2⌈log₂ T⌉` inputs
/// (`c` in the low half, `c'` in the high half) and one output.
pub fn compile_nondet_to<S: GateSink>(inst: &ReductionInstance, sink: S) -> Result<(S::Output, CompileStats)> {
    let lay = Layout::new(inst);
    let n = lay.config_bits;
    emit_with(sink, 2 * n, 1, |e| {
        let _constants = lay.charge(e);
        let input = e.input_bus(2 * n)?;
        let c = e.resize(&input[..n], lay.width);
        let c2 = e.resize(&input[n..], lay.width);
        drop(input);
        let a = numcopy(e, &lay, &c)?;
        let b = numcopy(e, &lay, &c2)?;
        let m = max_bus(e, &a.index, &b.index)?;
        let m_next = e.add_small(&m, 1)?;
        let padded = !lay.padding.is_zero();

        let lane = |e: &mut Emitter<_>, t: CopyType, idx: &[GateId]| {
            adjacency(e, &lay, inst, t, idx, &c, a.shared, &c2, b.shared)
        };
        let head_m = lane(e, CopyType::Head, &m)?;
        let formula_m = lane(e, CopyType::Formula, &m)?;
        let padding_m = if padded { lane(e, CopyType::Padding, &m)? } else { e.constant(false) };
        let tail_m = lane(e, CopyType::Tail, &m)?;
        let formula_n = lane(e, CopyType::Formula, &m_next)?;
        let padding_n = if padded { lane(e, CopyType::Padding, &m_next)? } else { e.constant(false) };
        let tail_n = lane(e, CopyType::Tail, &m_next)?;

        // relations between the endpoints
        let same = eq_bus(e, &a.index, &b.index);
        let a_next = e.add_small(&a.index, 1)?;
        let b_next = e.add_small(&b.index, 1)?;
        let up = eq_bus(e, &a_next, &b.index);
        let down = eq_bus(e, &b_next, &a.index);
        let adjacent = e.or(up, down);
        let either_shared = e.or(a.shared, b.shared);
        let both_shared = e.and(a.shared, b.shared);
        let not_shared_a = e.not(a.shared);
        let not_shared_b = e.not(b.shared);
        let neither_shared = e.and(not_shared_a, not_shared_b);
        let close = e.or(same, adjacent);
        let far = e.not(close);
        let unrelated = e.and(far, neither_shared);
        let one_copy = e.or(same, either_shared);
        let both_secondary = e.and(a.secondary, b.secondary);

        // position of m
        let m_zero = e.eq_small(&m, 0);
        let upto_formula = e.comparator_const(&m, &(&lay.formula_copies + 1u32))?;
        let below_formula_last = e.comparator_const(&m, &lay.formula_copies)?;
        let m_nonzero = e.not(m_zero);
        let formula_band = e.and(m_nonzero, upto_formula);
        let formula_inner = e.and(m_nonzero, below_formula_last);
        let formula_last = e.eq_const(&m, &lay.formula_copies);
        let last_padding = &lay.formula_copies + &lay.padding;
        let upto_padding = e.comparator_const(&m, &(&last_padding + 1u32))?;
        let below_padding_last = e.comparator_const(&m, &last_padding)?;
        let past_formula = e.not(upto_formula);
        let padding_band = e.and(past_formula, upto_padding);
        let padding_inner = e.and(past_formula, below_padding_last);
        let padding_last = if padded { e.eq_const(&m, &last_padding) } else { e.constant(false) };
        let m_tail = e.eq_const(&m, &lay.last_index);

        let mut terms = Vec::with_capacity(10);
        // both endpoints among the shared ports: every present copy type
        let mut all = vec![head_m, formula_m, formula_n, tail_n];
        if padded {
            all.extend([padding_m, padding_n]);
        }
        let any = e.or_all(all);
        terms.push(e.and(both_shared, any));
        // one copy, or a shared port with a vertex of one copy
        let banded = |e: &mut Emitter<_>, band: GateId, here: GateId, there: GateId| {
            let onward = e.and(there, both_secondary);
            let value = e.or(here, onward);
            let cond = e.and(one_copy, band);
            e.and(cond, value)
        };
        terms.push(banded(e, formula_inner, formula_m, formula_n));
        terms.push(banded(e, padding_inner, padding_m, padding_n));
        let after_formula = if padded { padding_n } else { tail_n };
        terms.push(banded(e, formula_last, formula_m, after_formula));
        terms.push(banded(e, m_zero, head_m, formula_n));
        if padded {
            terms.push(banded(e, padding_last, padding_m, tail_n));
        }
        // consecutive copies meeting at the smaller copy's secondary ports
        let in_formula = e.and(adjacent, formula_band);
        terms.push(e.and(in_formula, formula_m));
        let in_padding = e.and(adjacent, padding_band);
        terms.push(e.and(in_padding, padding_m));
        terms.push(e.and(m_tail, tail_m));

        let any_case = e.or_all(terms);
        let related = e.not(unrelated);
        let bit = e.and(related, any_case);
        e.output(bit)?;
        Ok(())
    })
}

pub fn compile_nondet(inst: &ReductionInstance) -> Result<Circuit> {
    compile_nondet_to(inst, CircuitSink::default()).map(|(c, _)| c)
}
