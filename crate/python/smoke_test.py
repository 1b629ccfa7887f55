"""Smoke test for the pymetareduce extension module."""

import json
import pathlib

import pymetareduce as mr

DATA = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "data"


def main() -> None:
    toy = mr.Gamma.from_json((DATA / "toy.json").read_text())
    assert toy.q == 2 and toy.k == 2

    inst = mr.Instance(toy, "x1", padding=2)
    params = inst.params()
    assert params["T"] == 16 and params["N"] == 4, params

    circuit = inst.compile()
    assert circuit.inputs == 4 and circuit.outputs == 4
    assert circuit.evaluate(4) == 4
    assert circuit.evaluate(15) == 9
    assert inst.check()
    assert sorted(inst.circuit_arcs()) == sorted(inst.oracle_arcs())

    report = json.loads(inst.rice())
    assert report["agree"] and report["satisfiable"], report

    unsat = mr.Instance(toy, "x1 & !x1", padding=2)
    assert not mr.mso(16, unsat.oracle_arcs(), "exists x (x -> x)")

    ntoy = mr.Gamma.from_json((DATA / "ntoy.json").read_text())
    relation = mr.Instance(ntoy, "x1 | x2", mode="nondet", padding=1)
    assert relation.check(jobs=2)

    arcs = mr.two_automata_arcs()
    assert len(arcs) == 9
    assert not mr.mso(9, arcs, "exists x (x -> x)")
    assert mr.mso(9, arcs, "exists x (exists y (x -> y & y -> x))")

    stats = json.loads(inst.stats())
    assert stats["gates"] == len(circuit)

    try:
        mr.Instance(toy, "x1")
    except ValueError as e:
        assert "power" in str(e)
    else:
        raise AssertionError("uniform sizing should fail for this family")

    print("smoke test passed")


if __name__ == "__main__":
    main()
