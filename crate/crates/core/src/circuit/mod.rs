// SPDX-License-Identifier: Apache-2.0

//! Gate-level Boolean circuits.
//!
//! A [`Circuit`] is a DAG of typed gates stored in topological order: every
//! gate only references gates with a strictly smaller id. Input gates are
//! numbered by their order of appearance, which is also the bit position they
//! read from an input [`BitWord`] (least-significant first).

mod arith;
mod emit;
pub mod json;

pub use emit::{Bus, CircuitSink, CountingSink, Emitter, GateSink, Meter, Scratch};
pub use json::{CircuitMeta, JsonSink};

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GateId(pub u32);

impl GateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Input,
    Output,
    And,
    Or,
    Not,
    Const0,
    Const1,
}

impl GateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GateKind::Input => "input",
            GateKind::Output => "output",
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Not => "not",
            GateKind::Const0 => "const0",
            GateKind::Const1 => "const1",
        }
    }

    pub fn parse(s: &str) -> Option<GateKind> {
        Some(match s {
            "input" => GateKind::Input,
            "output" => GateKind::Output,
            "and" => GateKind::And,
            "or" => GateKind::Or,
            "not" => GateKind::Not,
            "const0" => GateKind::Const0,
            "const1" => GateKind::Const1,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Input | GateKind::Const0 | GateKind::Const1 => 0,
            GateKind::Output | GateKind::Not => 1,
            GateKind::And | GateKind::Or => 2,
        }
    }
}

/// One gate; the variant fixes its arity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Input,
    Const(bool),
    Not(GateId),
    And(GateId, GateId),
    Or(GateId, GateId),
    Output(GateId),
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Input => GateKind::Input,
            Gate::Const(false) => GateKind::Const0,
            Gate::Const(true) => GateKind::Const1,
            Gate::Not(_) => GateKind::Not,
            Gate::And(..) => GateKind::And,
            Gate::Or(..) => GateKind::Or,
            Gate::Output(_) => GateKind::Output,
        }
    }

    pub fn args(&self) -> impl Iterator<Item = GateId> {
        let (a, b) = match *self {
            Gate::Input | Gate::Const(_) => (None, None),
            Gate::Not(a) | Gate::Output(a) => (Some(a), None),
            Gate::And(a, b) | Gate::Or(a, b) => (Some(a), Some(b)),
        };
        a.into_iter().chain(b)
    }

    pub fn from_kind(kind: GateKind, args: &[GateId]) -> Option<Gate> {
        if args.len() != kind.arity() {
            return None;
        }
        Some(match kind {
            GateKind::Input => Gate::Input,
            GateKind::Const0 => Gate::Const(false),
            GateKind::Const1 => Gate::Const(true),
            GateKind::Not => Gate::Not(args[0]),
            GateKind::Output => Gate::Output(args[0]),
            GateKind::And => Gate::And(args[0], args[1]),
            GateKind::Or => Gate::Or(args[0], args[1]),
        })
    }
}

/// Fixed-width bit vector, least-significant bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitWord(Vec<bool>);

impl BitWord {
    pub fn new(bits: Vec<bool>) -> Self {
        BitWord(bits)
    }

    pub fn zeros(width: usize) -> Self {
        BitWord(vec![false; width])
    }

    pub fn from_u64(value: u64, width: usize) -> Self {
        BitWord((0..width).map(|k| k < 64 && (value >> k) & 1 == 1).collect())
    }

    /// Low `width` bits of `value`.
    pub fn from_biguint(value: &BigUint, width: usize) -> Self {
        BitWord((0..width).map(|k| value.bit(k as u64)).collect())
    }

    /// Parses a string of `0`/`1` characters written most-significant first.
    pub fn from_msb_str(s: &str) -> Option<Self> {
        s.chars()
            .rev()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(BitWord)
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn bit(&self, k: usize) -> bool {
        self.0[k]
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut v = BigUint::zero();
        for (k, &b) in self.0.iter().enumerate() {
            if b {
                v.set_bit(k as u64, true);
            }
        }
        v
    }

    /// `None` if a set bit lies at position 64 or above.
    pub fn to_u64(&self) -> Option<u64> {
        let mut v = 0u64;
        for (k, &b) in self.0.iter().enumerate() {
            if b {
                if k >= 64 {
                    return None;
                }
                v |= 1 << k;
            }
        }
        Some(v)
    }

    pub fn concat(&self, high: &BitWord) -> BitWord {
        BitWord(self.0.iter().chain(high.0.iter()).copied().collect())
    }
}

impl fmt::Display for BitWord {
    /// Most-significant bit first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in self.0.iter().rev() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// An immutable, validated circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    input_count: usize,
    output_count: usize,
    gates: Vec<Gate>,
    output_order: Vec<GateId>,
    inputs: Vec<GateId>,
}

impl Circuit {
    /// Validates topological order, arities, port counts and the output order.
    pub fn new(
        input_count: usize,
        output_count: usize,
        gates: Vec<Gate>,
        output_order: Vec<GateId>,
    ) -> Result<Self> {
        let mut inputs = Vec::new();
        let mut outputs = 0usize;
        for (id, gate) in gates.iter().enumerate() {
            for arg in gate.args() {
                if arg.index() >= id {
                    return Err(Error::CircuitParse {
                        gate: id,
                        reason: format!("argument {arg} does not precede the gate (cycle or forward reference)"),
                    });
                }
                if matches!(gates[arg.index()], Gate::Output(_)) {
                    return Err(Error::CircuitParse {
                        gate: id,
                        reason: format!("argument {arg} is an output gate"),
                    });
                }
            }
            match gate {
                Gate::Input => inputs.push(GateId(id as u32)),
                Gate::Output(_) => outputs += 1,
                _ => {}
            }
        }
        if inputs.len() != input_count {
            return Err(Error::CircuitFormat(format!(
                "declared {input_count} inputs, found {}",
                inputs.len()
            )));
        }
        if outputs != output_count || output_order.len() != output_count {
            return Err(Error::CircuitFormat(format!(
                "declared {output_count} outputs, found {outputs} output gates and {} in output_order",
                output_order.len()
            )));
        }
        let mut seen = vec![false; gates.len()];
        for &o in &output_order {
            match gates.get(o.index()) {
                Some(Gate::Output(_)) if !seen[o.index()] => seen[o.index()] = true,
                _ => {
                    return Err(Error::CircuitFormat(format!(
                        "output_order entry {o} is not a distinct output gate"
                    )))
                }
            }
        }
        Ok(Circuit {
            input_count,
            output_count,
            gates,
            output_order,
            inputs,
        })
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn output_count(&self) -> usize {
        self.output_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output_order(&self) -> &[GateId] {
        &self.output_order
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Total number of argument references, i.e. wires of the DAG.
    pub fn wire_count(&self) -> usize {
        self.gates.iter().map(|g| g.args().count()).sum()
    }

    pub fn evaluate(&self, input: &BitWord) -> Result<BitWord> {
        if input.width() != self.input_count {
            return Err(Error::InputWidth {
                expected: self.input_count,
                actual: input.width(),
            });
        }
        let mut values = vec![false; self.gates.len()];
        let mut next_input = 0;
        for (id, gate) in self.gates.iter().enumerate() {
            values[id] = match *gate {
                Gate::Input => {
                    next_input += 1;
                    input.bit(next_input - 1)
                }
                Gate::Const(b) => b,
                Gate::Not(a) => !values[a.index()],
                Gate::And(a, b) => values[a.index()] && values[b.index()],
                Gate::Or(a, b) => values[a.index()] || values[b.index()],
                Gate::Output(a) => values[a.index()],
            };
        }
        Ok(BitWord(
            self.output_order.iter().map(|o| values[o.index()]).collect(),
        ))
    }

    /// Bit-sliced evaluation of 64 inputs at once: `lanes[k]` carries input
    /// bit `k` of every lane, the result carries output bits the same way.
    pub fn evaluate_lanes(&self, lanes: &[u64]) -> Result<Vec<u64>> {
        if lanes.len() != self.input_count {
            return Err(Error::InputWidth {
                expected: self.input_count,
                actual: lanes.len(),
            });
        }
        let mut values = vec![0u64; self.gates.len()];
        let mut next_input = 0;
        for (id, gate) in self.gates.iter().enumerate() {
            values[id] = match *gate {
                Gate::Input => {
                    next_input += 1;
                    lanes[next_input - 1]
                }
                Gate::Const(b) => {
                    if b {
                        u64::MAX
                    } else {
                        0
                    }
                }
                Gate::Not(a) => !values[a.index()],
                Gate::And(a, b) => values[a.index()] & values[b.index()],
                Gate::Or(a, b) => values[a.index()] | values[b.index()],
                Gate::Output(a) => values[a.index()],
            };
        }
        Ok(self.output_order.iter().map(|o| values[o.index()]).collect())
    }

    pub fn inputs(&self) -> &[GateId] {
        &self.inputs
    }
}
