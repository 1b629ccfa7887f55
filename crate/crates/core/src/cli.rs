// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. Exit codes: 0 success, 1 domain error, 2 usage
//! error. Artifacts go to standard output or `-o`; diagnostics to standard
//! error.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use crate::circuit::{json, BitWord, Circuit, CircuitMeta, CountingSink, JsonSink};
use crate::compile::{compile_det_to, compile_nondet_to, CompileStats};
use crate::error::{Error, Result};
use crate::glue::{explicit_dynamics, parse_dot, GammaSpec};
use crate::instance::{Mode, ReductionInstance, SizingMode};
use crate::sat::PropFormula;
use crate::verify::{
    check_equivalence, enumerate_semantics, instance_semantics, mso_check, rice_probe, EnumerateOptions,
    MsoFormula, SemanticGraph, Verdict, DEFAULT_MSO_BUDGET,
};

#[derive(Parser, Debug)]
#[command(name = "metareduce", version, about = "Compile SAT instances into automata-network circuits and check them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct InstanceArgs {
    /// Gadget family (JSON).
    #[arg(long)]
    gamma: PathBuf,
    /// Formula: a DIMACS or expression file, or an inline expression.
    #[arg(long)]
    sat: String,
    #[arg(long, default_value = "det", value_parser = parse_mode)]
    mode: Mode,
    /// Padding from the family's closed form; the total must be a power of q.
    #[arg(long, conflicts_with_all = ["free", "padding"])]
    uniform: bool,
    /// Padding given by --L.
    #[arg(long, requires = "padding")]
    free: bool,
    /// Number of padding copies (implies --free).
    #[arg(long = "L", id = "padding", value_name = "n")]
    padding: Option<BigUint>,
}

/// Instance flags for subcommands that also accept `--circuit`.
#[derive(Args, Debug, Clone)]
struct SourceArgs {
    /// Circuit JSON; when absent the instance is compiled in memory.
    #[arg(long, conflicts_with_all = ["gamma", "sat"])]
    circuit: Option<PathBuf>,
    #[arg(long, required_unless_present = "circuit")]
    gamma: Option<PathBuf>,
    #[arg(long, required_unless_present = "circuit")]
    sat: Option<String>,
    #[arg(long, default_value = "det", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long, conflicts_with_all = ["free", "padding"])]
    uniform: bool,
    #[arg(long, requires = "padding")]
    free: bool,
    #[arg(long = "L", id = "padding", value_name = "n")]
    padding: Option<BigUint>,
}

impl SourceArgs {
    fn instance(&self) -> Option<InstanceArgs> {
        Some(InstanceArgs {
            gamma: self.gamma.clone()?,
            sat: self.sat.clone()?,
            mode: self.mode,
            uniform: self.uniform,
            free: self.free,
            padding: self.padding.clone(),
        })
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct EnumArgs {
    /// Worker threads for circuit evaluation.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Refuse to enumerate more configurations than this.
    #[arg(long)]
    bound: Option<usize>,
}

impl From<EnumArgs> for EnumerateOptions {
    fn from(a: EnumArgs) -> Self {
        EnumerateOptions {
            jobs: a.jobs,
            bound: a.bound,
        }
    }
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum GraphFormat {
    Dot,
    Arcs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print 2^s, L, T and N.
    Params(InstanceArgs),
    /// Emit the circuit as JSON.
    Compile {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Also write emission statistics (JSON) to this file.
        #[arg(long)]
        emit_stats: Option<PathBuf>,
    },
    /// Evaluate a circuit on one configuration (or pair).
    Eval {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        config: BigUint,
        #[arg(long)]
        config2: Option<BigUint>,
    },
    /// Enumerate the dynamics a circuit encodes.
    Enumerate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        opts: EnumArgs,
        #[arg(long, value_enum, default_value = "dot")]
        format: GraphFormat,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Build the dynamics directly by gluing gadgets.
    Oracle {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_enum, default_value = "dot")]
        format: GraphFormat,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Compile, enumerate and compare with the oracle.
    Check {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Check this circuit file instead of compiling the instance.
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[command(flatten)]
        opts: EnumArgs,
    },
    /// Model-check a formula on a DOT graph or a circuit's dynamics.
    Mso {
        #[arg(long)]
        formula: String,
        /// DOT file or circuit JSON.
        #[arg(long)]
        graph: PathBuf,
        /// Mode of a circuit without metadata.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = DEFAULT_MSO_BUDGET)]
        budget: u128,
    },
    /// Compare a model check on the compiled dynamics with brute-force SAT.
    Rice {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value = "exists x (x -> x)")]
        formula: String,
        #[arg(long, default_value_t = DEFAULT_MSO_BUDGET)]
        budget: u128,
    },
    /// Emission statistics without keeping the circuit.
    Stats(InstanceArgs),
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

impl InstanceArgs {
    fn formula(&self) -> Result<PropFormula> {
        let path = Path::new(&self.sat);
        if path.is_file() {
            PropFormula::parse(&read(path)?)
        } else {
            PropFormula::parse(&self.sat)
        }
    }

    fn build(&self) -> Result<ReductionInstance> {
        let gamma = GammaSpec::from_json(&read(&self.gamma)?)?;
        let sizing = match &self.padding {
            Some(l) if !self.uniform => SizingMode::Free { l: l.clone() },
            _ => SizingMode::Uniform,
        };
        ReductionInstance::new(gamma, self.formula()?, sizing, self.mode)
    }
}

fn write_output(output: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => fs::write(path, bytes)?,
        None => out.write_all(bytes)?,
    }
    Ok(())
}

fn render(g: &SemanticGraph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Dot => g.to_dot(),
        GraphFormat::Arcs => g.arcs().map(|(u, v)| format!("{u} -> {v}\n")).collect(),
    }
}

fn circuit_source(circuit: Option<&Path>, inst: Option<&InstanceArgs>) -> Result<(Circuit, Mode, Option<CircuitMeta>)> {
    match (circuit, inst) {
        (Some(path), _) => {
            let (c, meta) = json::deserialize(&fs::read(path)?)?;
            let mode = match &meta {
                Some(m) => m.mode.parse()?,
                None if c.output_count() == 1 && c.input_count() % 2 == 0 && c.input_count() > 1 => Mode::NonDeterministic,
                None => Mode::Deterministic,
            };
            Ok((c, mode, meta))
        }
        (None, Some(args)) => {
            let inst = args.build()?;
            let circuit = match inst.mode() {
                Mode::Deterministic => crate::compile::compile_det(&inst)?,
                Mode::NonDeterministic => crate::compile::compile_nondet(&inst)?,
            };
            Ok((circuit, inst.mode(), Some(inst.meta())))
        }
        (None, None) => Err(Error::Construction("give --circuit or --gamma/--sat".into())),
    }
}

fn total_of(circuit: &Circuit, mode: Mode, meta: Option<&CircuitMeta>) -> Result<BigUint> {
    match meta {
        Some(m) => m
            .total
            .parse()
            .map_err(|_| Error::CircuitFormat(format!("bad total {:?}", m.total))),
        None => {
            let bits = match mode {
                Mode::Deterministic => circuit.input_count(),
                Mode::NonDeterministic => circuit.input_count() / 2,
            };
            Ok(BigUint::from(1u32) << bits)
        }
    }
}

fn stats_of(inst: &ReductionInstance) -> Result<CompileStats> {
    Ok(match inst.mode() {
        Mode::Deterministic => compile_det_to(inst, CountingSink::default())?.1,
        Mode::NonDeterministic => compile_nondet_to(inst, CountingSink::default())?.1,
    })
}

/// Outcome of a subcommand that completed without an error.
enum Outcome {
    Ok,
    /// Ran to completion but found a domain-level failure.
    Failed,
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::Params(args) => {
            let inst = args.build()?;
            let s = inst.sizes();
            writeln!(out, "s={}", s.s)?;
            writeln!(out, "2^s={}", s.two_pow_s)?;
            writeln!(out, "L={}", s.l)?;
            writeln!(out, "T={}", s.total)?;
            match s.n {
                Some(n) => writeln!(out, "N={n}")?,
                None => writeln!(out, "N=none")?,
            }
        }
        Command::Compile { inst, output, emit_stats } => {
            let inst = inst.build()?;
            let meta = Some(inst.meta());
            let stats = match &output {
                Some(path) => {
                    let file = BufWriter::new(fs::File::create(path)?);
                    let (w, stats) = match inst.mode() {
                        Mode::Deterministic => compile_det_to(&inst, JsonSink::new(file, meta))?,
                        Mode::NonDeterministic => compile_nondet_to(&inst, JsonSink::new(file, meta))?,
                    };
                    w.into_inner().map_err(|e| Error::Io(e.into_error()))?.sync_all()?;
                    stats
                }
                None => {
                    let sink = JsonSink::new(BufWriter::new(&mut *out), meta);
                    let (mut w, stats) = match inst.mode() {
                        Mode::Deterministic => compile_det_to(&inst, sink)?,
                        Mode::NonDeterministic => compile_nondet_to(&inst, sink)?,
                    };
                    w.flush()?;
                    stats
                }
            };
            if let Some(path) = emit_stats {
                fs::write(path, serde_json::to_string_pretty(&stats)? + "\n")?;
            }
        }
        Command::Eval {
            source,
            config,
            config2,
        } => {
            let (circuit, mode, meta) = circuit_source(source.circuit.as_deref(), source.instance().as_ref())?;
            let total = total_of(&circuit, mode, meta.as_ref())?;
            for c in std::iter::once(&config).chain(config2.as_ref()) {
                if *c >= total {
                    return Err(Error::Bound {
                        what: "configuration",
                        actual: c.to_string(),
                        bound: format!("{} (exclusive)", total),
                    });
                }
            }
            match mode {
                Mode::Deterministic => {
                    if config2.is_some() {
                        return Err(Error::Construction("--config2 needs a non-deterministic circuit".into()));
                    }
                    let value = circuit.evaluate(&BitWord::from_biguint(&config, circuit.input_count()))?;
                    writeln!(out, "{}", value.to_biguint())?;
                }
                Mode::NonDeterministic => {
                    let second = config2
                        .ok_or_else(|| Error::Construction("a non-deterministic circuit needs --config2".into()))?;
                    let n = circuit.input_count() / 2;
                    let word = BitWord::from_biguint(&config, n).concat(&BitWord::from_biguint(&second, n));
                    let bit = circuit.evaluate(&word)?;
                    writeln!(out, "{}", u8::from(bit.bit(0)))?;
                }
            }
        }
        Command::Enumerate {
            source,
            opts,
            format,
            output,
        } => {
            let (circuit, mode, meta) = circuit_source(source.circuit.as_deref(), source.instance().as_ref())?;
            let total = total_of(&circuit, mode, meta.as_ref())?;
            let bound = usize::MAX;
            let total = crate::sizing::to_usize(&total, "configurations", bound)?;
            let g = enumerate_semantics(&circuit, mode, total, opts.into())?;
            write_output(output.as_deref(), render(&g, format).as_bytes(), out)?;
        }
        Command::Oracle { inst, format, output } => {
            let inst = inst.build()?;
            let d = explicit_dynamics(&inst)?;
            let text = match format {
                GraphFormat::Dot => d.to_dot(),
                GraphFormat::Arcs => render(&SemanticGraph::from(&d), format),
            };
            write_output(output.as_deref(), text.as_bytes(), out)?;
        }
        Command::Check { inst, circuit, opts } => {
            let inst = inst.build()?;
            let oracle = explicit_dynamics(&inst)?;
            let sem = match circuit {
                Some(path) => {
                    let (circuit, _) = json::deserialize(&fs::read(path)?)?;
                    enumerate_semantics(&circuit, inst.mode(), oracle.total(), opts.into())?
                }
                None => instance_semantics(&inst, opts.into())?.1,
            };
            match check_equivalence(&sem, &oracle)? {
                Verdict::Equivalent { configurations } => {
                    writeln!(out, "EQUIVALENT ({configurations} configurations)")?;
                }
                Verdict::Mismatch { vertex, circuit, oracle } => {
                    writeln!(out, "MISMATCH at configuration {vertex}: circuit {circuit:?}, oracle {oracle:?}")?;
                    return Ok(Outcome::Failed);
                }
            }
        }
        Command::Mso {
            formula,
            graph,
            mode,
            budget,
        } => {
            let phi = MsoFormula::parse(&formula)?;
            let bytes = fs::read(&graph)?;
            let g = if bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{') {
                let (circuit, meta) = json::deserialize(&bytes)?;
                let mode = match (&meta, mode) {
                    (_, Some(m)) => m,
                    (Some(meta), None) => meta.mode.parse()?,
                    (None, None) => Mode::Deterministic,
                };
                let total = total_of(&circuit, mode, meta.as_ref())?;
                let total = crate::sizing::to_usize(&total, "configurations", usize::MAX)?;
                enumerate_semantics(&circuit, mode, total, EnumerateOptions::default())?
            } else {
                let text = String::from_utf8(bytes).map_err(|_| Error::Graph("DOT file is not UTF-8".into()))?;
                let (n, arcs) = parse_dot(&text)?;
                SemanticGraph::from_arcs(n, arcs)
            };
            let verdict = mso_check(&g, &phi, budget)?;
            writeln!(out, "{}", serde_json::to_string(&verdict)?)?;
        }
        Command::Rice { inst, formula, budget } => {
            let inst = inst.build()?;
            let phi = MsoFormula::parse(&formula)?;
            let report = rice_probe(&inst, &phi, budget)?;
            writeln!(out, "{}", serde_json::to_string(&report)?)?;
            if !report.agree {
                return Ok(Outcome::Failed);
            }
        }
        Command::Stats(args) => {
            let inst = args.build()?;
            let stats = stats_of(&inst)?;
            writeln!(out, "{}", serde_json::to_string(&stats)?)?;
        }
    }
    Ok(Outcome::Ok)
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Failed) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
