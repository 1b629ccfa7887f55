// SPDX-License-Identifier: Apache-2.0

use super::*;
use crate::circuit::{CircuitSink, Emitter};
use crate::glue::fixtures;
use crate::instance::SizingMode;
use crate::sat::parse_expr;

fn toy(expr: &str, l: u32, mode: Mode) -> ReductionInstance {
    let gamma = match mode {
        Mode::Deterministic => fixtures::toy(),
        Mode::NonDeterministic => fixtures::ntoy(),
    };
    ReductionInstance::new(gamma, parse_expr(expr).unwrap(), SizingMode::Free { l: l.into() }, mode).unwrap()
}

fn identity(n: usize) -> Circuit {
    let mut e = Emitter::new(CircuitSink::default(), n, n).unwrap();
    let x = e.input_bus(n).unwrap();
    e.output_bus(&x).unwrap();
    drop(x);
    e.finish().unwrap()
}

#[test]
fn two_automata_transitions() {
    let g = digit_dynamics(&two_automata_circuit(), 3, 2, 2).unwrap();
    assert_eq!(g.vertex_count(), 9);
    assert_eq!(g.arc_count(), 9);
    // vertex 3·x1 + x2
    for x1 in 0..3 {
        let base = 3 * x1;
        assert_eq!(g.successors(base), &[base + 1]);
        assert_eq!(g.successors(base + 1), &[base + 2]);
        assert_eq!(g.successors(base + 2), &[base + 1]);
    }
    let looped = MsoFormula::parse("exists x (x -> x)").unwrap();
    let two_cycle = MsoFormula::parse("exists x (exists y (x -> y & y -> x))").unwrap();
    assert!(!mso_check(&g, &looped, DEFAULT_MSO_BUDGET).unwrap().result);
    assert!(mso_check(&g, &two_cycle, DEFAULT_MSO_BUDGET).unwrap().result);
}

#[test]
fn identity_circuit_has_only_self_loops() {
    let g = enumerate_semantics(&identity(3), Mode::Deterministic, 8, EnumerateOptions::default()).unwrap();
    assert!((0..8).all(|v| g.successors(v) == [v]));
    // a total below 2^n only enumerates the first labels
    let g = enumerate_semantics(&identity(3), Mode::Deterministic, 5, EnumerateOptions::default()).unwrap();
    assert_eq!(g.vertex_count(), 5);
}

#[test]
fn enumeration_bound_is_enforced() {
    let err = enumerate_semantics(
        &identity(3),
        Mode::Deterministic,
        8,
        EnumerateOptions { jobs: 1, bound: Some(7) },
    )
    .unwrap_err();
    assert!(matches!(err, Error::Bound { .. }));
    assert!(err.to_string().contains('7'));
}

#[test]
fn circuit_shape_must_match_mode() {
    assert!(matches!(
        enumerate_semantics(&identity(3), Mode::NonDeterministic, 2, EnumerateOptions::default()),
        Err(Error::SizeMismatch(_))
    ));
}

#[test]
fn parallel_enumeration_is_identical() {
    for (mode, l) in [(Mode::Deterministic, 3), (Mode::NonDeterministic, 1)] {
        let inst = toy("x1 | x2", l, mode);
        let (circuit, serial) = instance_semantics(&inst, EnumerateOptions::default()).unwrap();
        for jobs in [2, 3, 8] {
            let par = enumerate_semantics(
                &circuit,
                mode,
                serial.vertex_count(),
                EnumerateOptions { jobs, bound: None },
            )
            .unwrap();
            assert_eq!(par, serial, "{mode} jobs={jobs}");
        }
    }
}

#[test]
fn compiled_instance_equals_oracle() {
    let inst = toy("x1", 2, Mode::Deterministic);
    let (_, sem) = instance_semantics(&inst, EnumerateOptions::default()).unwrap();
    assert!(sem.is_functional());
    let oracle = explicit_dynamics(&inst).unwrap();
    assert_eq!(check_equivalence(&sem, &oracle).unwrap(), Verdict::Equivalent { configurations: 16 });
}

#[test]
fn redirected_arc_is_reported() {
    let inst = toy("x1", 2, Mode::Deterministic);
    let (_, sem) = instance_semantics(&inst, EnumerateOptions::default()).unwrap();
    let mut oracle = explicit_dynamics(&inst).unwrap();
    oracle.set_successors(7, vec![0]);
    assert_eq!(
        check_equivalence(&sem, &oracle).unwrap(),
        Verdict::Mismatch {
            vertex: 7,
            circuit: sem.successors(7).to_vec(),
            oracle: vec![0],
        }
    );
    let small = SemanticGraph::from_function(&[0]);
    assert!(matches!(check_equivalence(&small, &oracle), Err(Error::SizeMismatch(_))));
}

#[test]
fn det_circuit_against_nondet_oracle() {
    let det = toy("x1 & x2", 1, Mode::Deterministic);
    let (_, sem) = instance_semantics(&det, EnumerateOptions::default()).unwrap();
    let relation = det.with_mode(Mode::NonDeterministic).unwrap();
    let oracle = explicit_dynamics(&relation).unwrap();
    assert!(check_equivalence(&sem, &oracle).unwrap().is_equivalent());
}

#[test]
fn oracle_semantics_round_trip() {
    let inst = toy("x1", 0, Mode::Deterministic);
    let g = oracle_semantics(&inst).unwrap();
    assert_eq!(g.vertex_count(), 12);
    assert!(g.to_dot().starts_with("digraph dynamics {\n"));
}

#[test]
fn rice_probe_examples() {
    let phi = MsoFormula::parse("exists x (x -> x)").unwrap();
    for mode in [Mode::Deterministic, Mode::NonDeterministic] {
        let sat = rice_probe(&toy("x1", 2, mode), &phi, DEFAULT_MSO_BUDGET).unwrap();
        assert!(sat.model && sat.satisfiable && sat.agree, "{sat:?}");
        let unsat = rice_probe(&toy("x1 & !x1", 2, mode), &phi, DEFAULT_MSO_BUDGET).unwrap();
        assert!(!unsat.model && !unsat.satisfiable && unsat.agree, "{unsat:?}");
    }
}

#[test]
fn de_morgan_on_fixtures() {
    let graphs = [
        digit_dynamics(&two_automata_circuit(), 3, 2, 2).unwrap(),
        oracle_semantics(&toy("x1", 1, Mode::Deterministic)).unwrap(),
        oracle_semantics(&toy("x1 | x2", 0, Mode::NonDeterministic)).unwrap(),
    ];
    let formulas = [
        "exists x (x -> x)",
        "forall x (exists y (x -> y))",
        "exists x (exists y (x -> y & y -> x & !(x = y)))",
        "forall x (forall y (x -> y => exists z (y -> z)))",
    ];
    for g in &graphs {
        for text in formulas {
            let f = MsoFormula::parse(text).unwrap();
            let pos = mso_check(g, &f, DEFAULT_MSO_BUDGET).unwrap().result;
            let neg = mso_check(g, &f.clone().negate(), DEFAULT_MSO_BUDGET).unwrap().result;
            assert_eq!(pos, !neg, "{text}");
        }
    }
}
