// SPDX-License-Identifier: Apache-2.0

//! Extracting the graph a circuit encodes, comparing it with the oracle and
//! model checking it.

pub mod mso;

pub use mso::{mso_check, MsoFormula, MsoVerdict, DEFAULT_MSO_BUDGET};

use serde::Serialize;

use crate::circuit::{Circuit, CircuitSink, Emitter};
use crate::compile::{compile_det, compile_nondet};
use crate::error::{Error, Result};
use crate::glue::{explicit_dynamics, write_dot, ExplicitDynamics};
use crate::instance::{Mode, ReductionInstance};
use crate::sizing::to_usize;

/// Largest configuration count enumerated for a deterministic circuit.
pub const DEFAULT_DET_BOUND: usize = 1 << 16;
/// Largest configuration count enumerated for a non-deterministic circuit.
pub const DEFAULT_NONDET_BOUND: usize = 1 << 9;

/// An explicit digraph on `0..n`. Successor lists are sorted; targets of a
/// circuit-derived graph may lie outside `0..n` if the circuit is wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticGraph {
    succ: Vec<Vec<usize>>,
}

impl SemanticGraph {
    pub fn from_successors(mut succ: Vec<Vec<usize>>) -> Self {
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        SemanticGraph { succ }
    }

    pub fn from_function(f: &[usize]) -> Self {
        SemanticGraph {
            succ: f.iter().map(|&d| vec![d]).collect(),
        }
    }

    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut succ = vec![Vec::new(); n];
        for (u, v) in arcs {
            succ[u].push(v);
        }
        Self::from_successors(succ)
    }

    pub fn vertex_count(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.succ[u].binary_search(&v).is_ok()
    }

    pub fn arc_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, s)| s.iter().map(move |&v| (u, v)))
    }

    /// Every vertex has exactly one successor.
    pub fn is_functional(&self) -> bool {
        self.succ.iter().all(|s| s.len() == 1)
    }

    pub fn to_dot(&self) -> String {
        write_dot(self.vertex_count(), self.arcs(), |_| None)
    }
}

impl From<&ExplicitDynamics> for SemanticGraph {
    fn from(d: &ExplicitDynamics) -> Self {
        SemanticGraph {
            succ: (0..d.total()).map(|c| d.successors(c).to_vec()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnumerateOptions {
    pub jobs: usize,
    /// `None` picks the mode's default bound.
    pub bound: Option<usize>,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { jobs: 1, bound: None }
    }
}

fn lane_words(first: usize, count: usize, bits: usize) -> Vec<u64> {
    (0..bits)
        .map(|k| {
            (0..count).fold(0u64, |acc, lane| acc | ((((first + lane) >> k) & 1) as u64) << lane)
        })
        .collect()
}

/// Runs `work` over `0..total` in chunks, on up to `jobs` threads, and
/// concatenates the per-chunk results in order.
fn parallel_chunks<T: Send>(
    total: usize,
    jobs: usize,
    work: impl Fn(usize, usize) -> Result<Vec<T>> + Sync,
) -> Result<Vec<T>> {
    let jobs = jobs.max(1).min(total.max(1));
    let per = total.div_ceil(jobs).max(1);
    let parts: Vec<Result<Vec<T>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let work = &work;
                let start = (j * per).min(total);
                let end = ((j + 1) * per).min(total);
                scope.spawn(move || work(start, end))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("enumeration worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(total);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// Evaluates `circuit` on every configuration (pair) below `total`.
pub fn enumerate_semantics(circuit: &Circuit, mode: Mode, total: usize, opts: EnumerateOptions) -> Result<SemanticGraph> {
    let bound = opts.bound.unwrap_or(match mode {
        Mode::Deterministic => DEFAULT_DET_BOUND,
        Mode::NonDeterministic => DEFAULT_NONDET_BOUND,
    });
    if total > bound {
        return Err(Error::Bound {
            what: "configurations to enumerate",
            actual: total.to_string(),
            bound: bound.to_string(),
        });
    }
    let config_bits = match mode {
        Mode::Deterministic => circuit.input_count(),
        Mode::NonDeterministic => circuit.input_count() / 2,
    };
    if config_bits < usize::BITS as usize && total > 1usize << config_bits {
        return Err(Error::SizeMismatch(format!(
            "{total} configurations do not fit in {config_bits} input bits"
        )));
    }
    match mode {
        Mode::Deterministic => {
            let n = circuit.input_count();
            if circuit.output_count() != n {
                return Err(Error::SizeMismatch(format!(
                    "a deterministic circuit needs as many outputs as inputs, found {n} and {}",
                    circuit.output_count()
                )));
            }
            let succ = parallel_chunks(total, opts.jobs, |start, end| {
                let mut out = Vec::with_capacity(end - start);
                let mut c = start;
                while c < end {
                    let count = (end - c).min(64);
                    let outputs = circuit.evaluate_lanes(&lane_words(c, count, n))?;
                    for lane in 0..count {
                        let next = outputs
                            .iter()
                            .enumerate()
                            .fold(0usize, |acc, (k, &w)| acc | (((w >> lane) & 1) as usize) << k);
                        out.push(vec![next]);
                    }
                    c += count;
                }
                Ok(out)
            })?;
            Ok(SemanticGraph { succ })
        }
        Mode::NonDeterministic => {
            let width = circuit.input_count();
            if !width.is_multiple_of(2) || circuit.output_count() != 1 {
                return Err(Error::SizeMismatch(format!(
                    "a non-deterministic circuit needs an even input count and one output, found {width} and {}",
                    circuit.output_count()
                )));
            }
            let n = width / 2;
            let succ = parallel_chunks(total, opts.jobs, |start, end| {
                let mut out = Vec::with_capacity(end - start);
                for c in start..end {
                    let mut targets = Vec::new();
                    let mut d = 0;
                    while d < total {
                        let count = (total - d).min(64);
                        let mut lanes: Vec<u64> = (0..n)
                            .map(|k| if (c >> k) & 1 == 1 { u64::MAX } else { 0 })
                            .collect();
                        lanes.extend(lane_words(d, count, n));
                        let bit = circuit.evaluate_lanes(&lanes)?[0];
                        targets.extend((0..count).filter(|&lane| (bit >> lane) & 1 == 1).map(|lane| d + lane));
                        d += count;
                    }
                    out.push(targets);
                }
                Ok(out)
            })?;
            Ok(SemanticGraph { succ })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Verdict {
    Equivalent { configurations: usize },
    Mismatch {
        vertex: usize,
        circuit: Vec<usize>,
        oracle: Vec<usize>,
    },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }
}

/// Exact comparison of successor sets; reports the first differing vertex.
pub fn check_equivalence(sem: &SemanticGraph, oracle: &ExplicitDynamics) -> Result<Verdict> {
    if sem.vertex_count() != oracle.total() {
        return Err(Error::SizeMismatch(format!(
            "circuit graph has {} vertices, oracle has {}",
            sem.vertex_count(),
            oracle.total()
        )));
    }
    for c in 0..oracle.total() {
        if sem.successors(c) != oracle.successors(c) {
            return Ok(Verdict::Mismatch {
                vertex: c,
                circuit: sem.successors(c).to_vec(),
                oracle: oracle.successors(c).to_vec(),
            });
        }
    }
    Ok(Verdict::Equivalent {
        configurations: oracle.total(),
    })
}

/// Compiles `inst` in its own mode and enumerates the result.
pub fn instance_semantics(inst: &ReductionInstance, opts: EnumerateOptions) -> Result<(Circuit, SemanticGraph)> {
    let circuit = match inst.mode() {
        Mode::Deterministic => compile_det(inst)?,
        Mode::NonDeterministic => compile_nondet(inst)?,
    };
    let bound = opts.bound.unwrap_or(match inst.mode() {
        Mode::Deterministic => DEFAULT_DET_BOUND,
        Mode::NonDeterministic => DEFAULT_NONDET_BOUND,
    });
    let total = to_usize(&inst.sizes().total, "configurations to enumerate", bound)?;
    let sem = enumerate_semantics(&circuit, inst.mode(), total, opts)?;
    Ok((circuit, sem))
}

/// Outcome of compiling, enumerating, model checking and brute-forcing one
/// instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RiceReport {
    pub mode: String,
    pub configurations: usize,
    pub model: bool,
    pub satisfiable: bool,
    pub agree: bool,
}

pub fn rice_probe(inst: &ReductionInstance, phi: &MsoFormula, budget: u128) -> Result<RiceReport> {
    let (_, sem) = instance_semantics(inst, EnumerateOptions::default())?;
    let model = mso_check(&sem, phi, budget)?.result;
    let satisfiable = inst.formula().is_satisfiable()?;
    Ok(RiceReport {
        mode: inst.mode().as_str().into(),
        configurations: sem.vertex_count(),
        model,
        satisfiable,
        agree: model == satisfiable,
    })
}

/// Oracle dynamics of `inst` as a [`SemanticGraph`].
pub fn oracle_semantics(inst: &ReductionInstance) -> Result<SemanticGraph> {
    Ok(SemanticGraph::from(&explicit_dynamics(inst)?))
}

/// Two automata over `{0, 1, 2}` with `F1(x1 x2) = x1` and
/// `F2(x1 x2) = (x2 mod 2) + 1`. Each digit takes two little-endian bits,
/// `x2` in bits 0..2 and `x1` in bits 2..4.
pub fn two_automata_circuit() -> Circuit {
    let mut e = Emitter::new(CircuitSink::default(), 4, 4).expect("fresh emitter");
    let x = e.input_bus(4).expect("declared inputs");
    let low = e.not(x[0]);
    let out = [low, x[0], x[2], x[3]];
    e.output_bus(&out).expect("declared outputs");
    drop(x);
    e.finish().expect("well-formed circuit")
}

/// Dynamics of a digit-packed circuit over `q`-ary automata: configuration
/// `x1 … xn` is vertex `Σ x_k q^(n-k)`, digit `x_n` sits in the lowest
/// `bits_per_digit` input bits.
pub fn digit_dynamics(circuit: &Circuit, q: usize, digits: usize, bits_per_digit: usize) -> Result<SemanticGraph> {
    let total = q.pow(digits as u32);
    let encode = |mut v: usize| {
        let mut word = 0usize;
        for d in 0..digits {
            word |= (v % q) << (d * bits_per_digit);
            v /= q;
        }
        word
    };
    let decode = |word: usize| -> Option<usize> {
        let mut v = 0;
        for d in (0..digits).rev() {
            let digit = (word >> (d * bits_per_digit)) & ((1 << bits_per_digit) - 1);
            if digit >= q {
                return None;
            }
            v = v * q + digit;
        }
        Some(v)
    };
    let mut succ = Vec::with_capacity(total);
    for v in 0..total {
        let input = crate::circuit::BitWord::from_u64(encode(v) as u64, circuit.input_count());
        let out = circuit.evaluate(&input)?.to_u64().expect("narrow output") as usize;
        let next = decode(out).ok_or_else(|| {
            Error::SizeMismatch(format!("configuration {v} maps outside the alphabet (word {out:b})"))
        })?;
        succ.push(vec![next]);
    }
    Ok(SemanticGraph { succ })
}

#[cfg(test)]
mod tests;
