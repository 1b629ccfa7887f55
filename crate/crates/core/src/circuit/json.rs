// SPDX-License-Identifier: Apache-2.0

//! Circuit JSON format.
//!
//! ```text
//! {"meta":{...},"inputs":n,"outputs":m,"gates":[
//! {"id":0,"kind":"input"},
//! {"id":7,"kind":"and","args":[2,5]},
//! ...
//! ],"output_order":[...]}
//! ```
//!
//! Gates appear in id order and the header only needs the port counts, so
//! [`JsonSink`] can write the file while gates are still being emitted.
//! `meta` is optional on input.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::emit::GateSink;
use super::{Circuit, Gate, GateId, GateKind};
use crate::error::{Error, Result};

/// Instance description stored alongside a compiled circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMeta {
    /// Number of configurations, in decimal.
    pub total: String,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub s: usize,
    #[serde(rename = "L")]
    pub l: String,
    pub mode: String,
    pub arity: String,
    pub gamma_digest: String,
}

/// Writes gates as they arrive.
pub struct JsonSink<W: Write> {
    out: W,
    meta: Option<CircuitMeta>,
    first: bool,
}

impl<W: Write> JsonSink<W> {
    pub fn new(out: W, meta: Option<CircuitMeta>) -> Self {
        JsonSink {
            out,
            meta,
            first: true,
        }
    }
}

impl<W: Write> GateSink for JsonSink<W> {
    type Output = W;

    fn begin(&mut self, input_count: usize, output_count: usize) -> Result<()> {
        self.out.write_all(b"{")?;
        if let Some(meta) = &self.meta {
            self.out.write_all(b"\"meta\":")?;
            serde_json::to_writer(&mut self.out, meta)?;
            self.out.write_all(b",")?;
        }
        write!(
            self.out,
            "\"inputs\":{input_count},\"outputs\":{output_count},\"gates\":["
        )?;
        Ok(())
    }

    fn push(&mut self, id: GateId, gate: Gate) -> Result<()> {
        if !self.first {
            self.out.write_all(b",")?;
        }
        self.first = false;
        write!(self.out, "\n{{\"id\":{id},\"kind\":\"{}\"", gate.kind().as_str())?;
        let mut args = gate.args();
        if let Some(a) = args.next() {
            write!(self.out, ",\"args\":[{a}")?;
            for b in args {
                write!(self.out, ",{b}")?;
            }
            self.out.write_all(b"]")?;
        }
        self.out.write_all(b"}")?;
        Ok(())
    }

    fn finish(mut self, output_order: &[GateId]) -> Result<W> {
        self.out.write_all(b"\n],\"output_order\":[")?;
        for (k, o) in output_order.iter().enumerate() {
            if k > 0 {
                self.out.write_all(b",")?;
            }
            write!(self.out, "{o}")?;
        }
        self.out.write_all(b"]}\n")?;
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn write_circuit<W: Write>(circuit: &Circuit, meta: Option<&CircuitMeta>, out: W) -> Result<W> {
    let mut sink = JsonSink::new(out, meta.cloned());
    sink.begin(circuit.input_count(), circuit.output_count())?;
    for (id, gate) in circuit.gates().iter().enumerate() {
        sink.push(GateId(id as u32), *gate)?;
    }
    sink.finish(circuit.output_order())
}

pub fn serialize(circuit: &Circuit, meta: Option<&CircuitMeta>) -> Vec<u8> {
    write_circuit(circuit, meta, Vec::new()).expect("writing to a Vec cannot fail")
}

#[derive(Deserialize)]
struct RawGate {
    id: u64,
    kind: String,
    #[serde(default)]
    args: Vec<u64>,
}

#[derive(Deserialize)]
struct RawCircuit {
    #[serde(default)]
    meta: Option<CircuitMeta>,
    inputs: usize,
    outputs: usize,
    gates: Vec<RawGate>,
    output_order: Vec<u64>,
}

/// Parses and re-validates a circuit file.
pub fn deserialize(bytes: &[u8]) -> Result<(Circuit, Option<CircuitMeta>)> {
    let raw: RawCircuit = serde_json::from_slice(bytes)
        .map_err(|e| Error::CircuitFormat(e.to_string()))?;
    let mut gates = Vec::with_capacity(raw.gates.len());
    for (pos, g) in raw.gates.iter().enumerate() {
        if g.id != pos as u64 {
            return Err(Error::CircuitParse {
                gate: pos,
                reason: format!("id {} out of sequence", g.id),
            });
        }
        let kind = GateKind::parse(&g.kind).ok_or_else(|| Error::CircuitParse {
            gate: pos,
            reason: format!("unknown kind {:?}", g.kind),
        })?;
        let args = g
            .args
            .iter()
            .map(|&a| {
                if a >= pos as u64 {
                    Err(Error::CircuitParse {
                        gate: pos,
                        reason: format!("argument {a} does not precede the gate (cycle or forward reference)"),
                    })
                } else {
                    Ok(GateId(a as u32))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let gate = Gate::from_kind(kind, &args).ok_or_else(|| Error::CircuitParse {
            gate: pos,
            reason: format!("{} expects {} arguments, got {}", g.kind, kind.arity(), args.len()),
        })?;
        gates.push(gate);
    }
    let output_order = raw
        .output_order
        .iter()
        .map(|&o| {
            u32::try_from(o)
                .map(GateId)
                .map_err(|_| Error::CircuitFormat(format!("output id {o} out of range")))
        })
        .collect::<Result<Vec<_>>>()?;
    let circuit = Circuit::new(raw.inputs, raw.outputs, gates, output_order)?;
    Ok((circuit, raw.meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_dag(seed: &[(u8, u32, u32)], inputs: usize) -> Circuit {
        let mut gates = vec![Gate::Input; inputs];
        for &(kind, a, b) in seed {
            let n = gates.len() as u32;
            let (a, b) = (GateId(a % n), GateId(b % n));
            gates.push(match kind % 4 {
                0 => Gate::And(a, b),
                1 => Gate::Or(a, b),
                2 => Gate::Not(a),
                _ => Gate::Const(a.0 % 2 == 0),
            });
        }
        let last = GateId(gates.len() as u32 - 1);
        gates.push(Gate::Output(last));
        let out = GateId(gates.len() as u32 - 1);
        Circuit::new(inputs, 1, gates, vec![out]).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn round_trip(seed in proptest::collection::vec((any::<u8>(), any::<u32>(), any::<u32>()), 1000)) {
            let c = random_dag(&seed, 8);
            let bytes = serialize(&c, None);
            let (back, meta) = deserialize(&bytes).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert!(meta.is_none());
            prop_assert_eq!(serialize(&back, None), bytes);
        }
    }

    #[test]
    fn forward_reference_is_cyclicity_error() {
        let text = br#"{"inputs":3,"outputs":0,"gates":[
            {"id":0,"kind":"input"},{"id":1,"kind":"input"},{"id":2,"kind":"input"},
            {"id":3,"kind":"not","args":[5]},{"id":4,"kind":"const0"},{"id":5,"kind":"const1"}
        ],"output_order":[]}"#;
        let err = deserialize(text).unwrap_err();
        assert!(matches!(err, Error::CircuitParse { gate: 3, .. }), "{err}");
    }

    #[test]
    fn bad_arity_and_unknown_kind() {
        let text = br#"{"inputs":1,"outputs":0,"gates":[{"id":0,"kind":"input"},{"id":1,"kind":"and","args":[0]}],"output_order":[]}"#;
        assert!(matches!(deserialize(text), Err(Error::CircuitParse { gate: 1, .. })));
        let text = br#"{"inputs":1,"outputs":0,"gates":[{"id":0,"kind":"input"},{"id":1,"kind":"xor","args":[0,0]}],"output_order":[]}"#;
        assert!(matches!(deserialize(text), Err(Error::CircuitParse { gate: 1, .. })));
    }

    #[test]
    fn empty_circuit_round_trips() {
        let c = Circuit::new(0, 0, vec![], vec![]).unwrap();
        let bytes = serialize(&c, None);
        assert_eq!(deserialize(&bytes).unwrap().0, c);
    }

    #[test]
    fn meta_round_trips() {
        let c = Circuit::new(1, 1, vec![Gate::Input, Gate::Output(GateId(0))], vec![GateId(1)]).unwrap();
        let meta = CircuitMeta {
            total: "16".into(),
            n: Some(4),
            s: 1,
            l: "2".into(),
            mode: "free".into(),
            arity: "det".into(),
            gamma_digest: "abc".into(),
        };
        let bytes = serialize(&c, Some(&meta));
        let (back, m) = deserialize(&bytes).unwrap();
        assert_eq!(back, c);
        assert_eq!(m, Some(meta));
    }
}
