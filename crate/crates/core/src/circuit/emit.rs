// SPDX-License-Identifier: Apache-2.0

//! Streaming gate emission.
//!
//! An [`Emitter`] hands every gate to a [`GateSink`] as soon as it is created
//! and never looks at it again, so the emitted circuit does not count against
//! the emitter's working memory. Working memory is metered instead: every
//! live [`Bus`] and every [`Scratch`] reservation is charged to a shared
//! [`Meter`] and released on drop.

use std::cell::Cell;
use std::mem::size_of;
use std::ops::Deref;
use std::rc::Rc;

use super::{Circuit, Gate, GateId};
use crate::error::{Error, Result};

/// Receives gates in ascending id order.
pub trait GateSink {
    type Output;

    fn begin(&mut self, input_count: usize, output_count: usize) -> Result<()>;
    fn push(&mut self, id: GateId, gate: Gate) -> Result<()>;
    fn finish(self, output_order: &[GateId]) -> Result<Self::Output>;
}

/// Collects gates into an in-memory [`Circuit`].
#[derive(Debug, Default)]
pub struct CircuitSink {
    inputs: usize,
    outputs: usize,
    gates: Vec<Gate>,
}

impl GateSink for CircuitSink {
    type Output = Circuit;

    fn begin(&mut self, input_count: usize, output_count: usize) -> Result<()> {
        self.inputs = input_count;
        self.outputs = output_count;
        Ok(())
    }

    fn push(&mut self, _id: GateId, gate: Gate) -> Result<()> {
        self.gates.push(gate);
        Ok(())
    }

    fn finish(self, output_order: &[GateId]) -> Result<Circuit> {
        Circuit::new(self.inputs, self.outputs, self.gates, output_order.to_vec())
    }
}

/// Discards gates, keeping only counts.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CountingSink {
    pub gates: usize,
    pub wires: usize,
}

impl GateSink for CountingSink {
    type Output = CountingSink;

    fn begin(&mut self, _: usize, _: usize) -> Result<()> {
        Ok(())
    }

    fn push(&mut self, _id: GateId, gate: Gate) -> Result<()> {
        self.gates += 1;
        self.wires += gate.args().count();
        Ok(())
    }

    fn finish(self, _: &[GateId]) -> Result<CountingSink> {
        Ok(self)
    }
}

/// Live/peak byte counter for auxiliary emission state.
#[derive(Debug, Default)]
pub struct Meter {
    live: Cell<usize>,
    peak: Cell<usize>,
}

impl Meter {
    fn charge(&self, bytes: usize) {
        let live = self.live.get() + bytes;
        self.live.set(live);
        if live > self.peak.get() {
            self.peak.set(live);
        }
    }

    fn release(&self, bytes: usize) {
        self.live.set(self.live.get() - bytes);
    }

    pub fn live(&self) -> usize {
        self.live.get()
    }

    pub fn peak(&self) -> usize {
        self.peak.get()
    }
}

/// A little-endian bundle of wires, charged to the meter while alive.
#[derive(Debug)]
pub struct Bus {
    wires: Vec<GateId>,
    meter: Rc<Meter>,
}

impl Bus {
    fn bytes(len: usize) -> usize {
        len * size_of::<GateId>()
    }

    pub fn wires(&self) -> &[GateId] {
        &self.wires
    }

    pub fn width(&self) -> usize {
        self.wires.len()
    }
}

impl Deref for Bus {
    type Target = [GateId];

    fn deref(&self) -> &[GateId] {
        &self.wires
    }
}

impl Clone for Bus {
    fn clone(&self) -> Self {
        self.meter.charge(Bus::bytes(self.wires.len()));
        Bus {
            wires: self.wires.clone(),
            meter: Rc::clone(&self.meter),
        }
    }
}

impl Drop for Bus {
    fn drop(&mut self) {
        self.meter.release(Bus::bytes(self.wires.len()));
    }
}

/// A reservation of auxiliary bytes (constants held during emission).
#[derive(Debug)]
pub struct Scratch {
    bytes: usize,
    meter: Rc<Meter>,
}

impl Drop for Scratch {
    fn drop(&mut self) {
        self.meter.release(self.bytes);
    }
}

/// Fixed per-emitter state, counted once.
const EMITTER_STATE: usize = 4 * size_of::<usize>() + 2 * size_of::<Option<GateId>>();

pub struct Emitter<S: GateSink> {
    sink: S,
    next_id: u32,
    input_count: usize,
    output_count: usize,
    inputs_emitted: usize,
    consts: [Option<GateId>; 2],
    output_order: Vec<GateId>,
    meter: Rc<Meter>,
    error: Option<Error>,
}

impl<S: GateSink> Emitter<S> {
    pub fn new(mut sink: S, input_count: usize, output_count: usize) -> Result<Self> {
        sink.begin(input_count, output_count)?;
        let meter = Rc::new(Meter::default());
        meter.charge(EMITTER_STATE);
        Ok(Emitter {
            sink,
            next_id: 0,
            input_count,
            output_count,
            inputs_emitted: 0,
            consts: [None, None],
            output_order: Vec::new(),
            meter,
            error: None,
        })
    }

    fn push(&mut self, gate: Gate) -> GateId {
        let id = GateId(self.next_id);
        self.next_id += 1;
        if self.error.is_none() {
            if let Err(e) = self.sink.push(id, gate) {
                self.error = Some(e);
            }
        }
        id
    }

    pub fn sink_ref(&self) -> &S {
        &self.sink
    }

    pub fn gate_count(&self) -> usize {
        self.next_id as usize
    }

    pub fn meter(&self) -> &Meter {
        &self.meter
    }

    /// Peak auxiliary bytes so far.
    pub fn peak_workspace(&self) -> usize {
        self.meter.peak()
    }

    pub fn bus(&self, wires: Vec<GateId>) -> Bus {
        self.meter.charge(Bus::bytes(wires.len()));
        Bus {
            wires,
            meter: Rc::clone(&self.meter),
        }
    }

    pub fn scratch(&self, bytes: usize) -> Scratch {
        self.meter.charge(bytes);
        Scratch {
            bytes,
            meter: Rc::clone(&self.meter),
        }
    }

    pub fn input(&mut self) -> Result<GateId> {
        if self.inputs_emitted == self.input_count {
            return Err(Error::Construction(format!(
                "more than the declared {} inputs",
                self.input_count
            )));
        }
        self.inputs_emitted += 1;
        Ok(self.push(Gate::Input))
    }

    pub fn input_bus(&mut self, width: usize) -> Result<Bus> {
        let wires = (0..width).map(|_| self.input()).collect::<Result<Vec<_>>>()?;
        Ok(self.bus(wires))
    }

    pub fn constant(&mut self, value: bool) -> GateId {
        let slot = value as usize;
        if let Some(id) = self.consts[slot] {
            return id;
        }
        let id = self.push(Gate::Const(value));
        self.consts[slot] = Some(id);
        id
    }

    pub fn const_value(&self, id: GateId) -> Option<bool> {
        if self.consts[0] == Some(id) {
            Some(false)
        } else if self.consts[1] == Some(id) {
            Some(true)
        } else {
            None
        }
    }

    pub fn not(&mut self, a: GateId) -> GateId {
        match self.const_value(a) {
            Some(v) => self.constant(!v),
            None => self.push(Gate::Not(a)),
        }
    }

    pub fn and(&mut self, a: GateId, b: GateId) -> GateId {
        match (self.const_value(a), self.const_value(b)) {
            (Some(false), _) | (_, Some(false)) => self.constant(false),
            (Some(true), _) => b,
            (_, Some(true)) => a,
            _ if a == b => a,
            _ => self.push(Gate::And(a, b)),
        }
    }

    pub fn or(&mut self, a: GateId, b: GateId) -> GateId {
        match (self.const_value(a), self.const_value(b)) {
            (Some(true), _) | (_, Some(true)) => self.constant(true),
            (Some(false), _) => b,
            (_, Some(false)) => a,
            _ if a == b => a,
            _ => self.push(Gate::Or(a, b)),
        }
    }

    /// Lowered to `(a | b) & !(a & b)`.
    pub fn xor(&mut self, a: GateId, b: GateId) -> GateId {
        match (self.const_value(a), self.const_value(b)) {
            (Some(x), Some(y)) => self.constant(x ^ y),
            (Some(false), _) => b,
            (_, Some(false)) => a,
            (Some(true), _) => self.not(b),
            (_, Some(true)) => self.not(a),
            _ => {
                let either = self.or(a, b);
                let both = self.and(a, b);
                let not_both = self.not(both);
                self.and(either, not_both)
            }
        }
    }

    pub fn and_all(&mut self, ids: impl IntoIterator<Item = GateId>) -> GateId {
        let mut acc = self.constant(true);
        for id in ids {
            acc = self.and(acc, id);
        }
        acc
    }

    pub fn or_all(&mut self, ids: impl IntoIterator<Item = GateId>) -> GateId {
        let mut acc = self.constant(false);
        for id in ids {
            acc = self.or(acc, id);
        }
        acc
    }

    pub fn output(&mut self, a: GateId) -> Result<GateId> {
        if self.output_order.len() == self.output_count {
            return Err(Error::Construction(format!(
                "more than the declared {} outputs",
                self.output_count
            )));
        }
        let id = self.push(Gate::Output(a));
        self.meter.charge(size_of::<GateId>());
        self.output_order.push(id);
        Ok(id)
    }

    pub fn output_bus(&mut self, bus: &[GateId]) -> Result<()> {
        for &w in bus {
            self.output(w)?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<S::Output> {
        if let Some(e) = self.error {
            return Err(e);
        }
        if self.inputs_emitted != self.input_count {
            return Err(Error::Construction(format!(
                "declared {} inputs, emitted {}",
                self.input_count, self.inputs_emitted
            )));
        }
        if self.output_order.len() != self.output_count {
            return Err(Error::Construction(format!(
                "declared {} outputs, emitted {}",
                self.output_count,
                self.output_order.len()
            )));
        }
        self.sink.finish(&self.output_order)
    }
}
