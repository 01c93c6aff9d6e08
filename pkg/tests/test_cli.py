from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from fintopos import docs
from fintopos.cli import main
from fintopos.cohomology import Z, constant_ab
from fintopos.errors import ParseError
from fintopos.finposet import chain, discrete, pseudo_circle, sierpinski
from fintopos.generators import random_ab_sheaf, random_presheaf, random_simplicial_set
from fintopos.lattice import chain_lattice
from fintopos.sheaf import constant_presheaf, find_isomorphism, is_sheaf
from fintopos.simplicial import find_isomorphism as find_simplicial_isomorphism


def write(tmp_path: Path, name: str, doc) -> str:
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc), encoding="utf-8")
    return str(p)


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv) -> tuple[int, dict]:
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_dim_sierpinski(tmp_path, capsys):
    p = write(tmp_path, "s.json", sierpinski().to_doc())
    code, rep = run_json(capsys, "dim", p)
    assert code == 0
    assert rep["results"] == {"krull": 1, "heyting": 1, "covering": 0}
    assert rep["assertions"] == {"krull_equals_heyting": True}


def test_dim_empty_poset(tmp_path, capsys):
    code, rep = run_json(capsys, "dim", write(tmp_path, "e.json", {"points": 0, "le": []}))
    assert code == 0 and set(rep["results"].values()) == {-1}


@pytest.mark.parametrize(
    "text",
    ['{"points": 2, "le": [[0', '{"points": 2}', '{"points": 2, "le": [[0, 5]]}', '{"points": 2, "le": [[0, 1], [1, 0]]}'],
)
def test_bad_poset_documents_exit_2(tmp_path, capsys, text):
    code, out, err = run(capsys, "dim", write(tmp_path, "bad.json", text))
    assert code == 2 and out == "" and "error" in err


def test_missing_file_exits_2(tmp_path, capsys):
    code, _, err = run(capsys, "dim", str(tmp_path / "nope.json"))
    assert code == 2 and "ParseError" in err


def test_cohomology_pseudo_circle(tmp_path, capsys):
    X = pseudo_circle()
    p = write(tmp_path, "x.json", X.to_doc())
    f = write(tmp_path, "f.json", constant_ab(X, Z).to_doc())
    code, rep = run_json(capsys, "cohomology", p, f)
    assert code == 0
    assert rep["results"]["cohomology"] == {"H^0": "Z", "H^1": "Z", "H^2": "0", "H^3": "0", "H^4": "0"}
    code, rep = run_json(capsys, "cohomology", p, f, "--max-degree", "1")
    assert list(rep["results"]["cohomology"]) == ["H^0", "H^1"]


def test_cohomology_on_chain_vanishes_above_two(tmp_path, capsys):
    X = chain(3)
    p = write(tmp_path, "x.json", X.to_doc())
    rng = random.Random(4)
    for i in range(5):
        f = write(tmp_path, f"f{i}.json", random_ab_sheaf(rng, X).to_doc())
        code, rep = run_json(capsys, "cohomology", p, f)
        assert code == 0 and rep["results"]["cohomology"]["H^3"] == "0"


def test_cohomology_wrong_space_exits_2(tmp_path, capsys):
    p = write(tmp_path, "x.json", pseudo_circle().to_doc())
    f = write(tmp_path, "f.json", constant_ab(sierpinski(), Z).to_doc())
    code, _, err = run(capsys, "cohomology", p, f)
    assert code == 2 and "SpaceMismatch" in err


def test_duality_on_poset_and_lattice(tmp_path, capsys):
    code, rep = run_json(capsys, "duality", write(tmp_path, "s.json", sierpinski().to_doc()))
    assert code == 0 and rep["results"]["kind"] == "poset" and len(rep["results"]["witness"]) == 2
    code, rep = run_json(capsys, "duality", write(tmp_path, "l.json", chain_lattice(4).to_doc()))
    assert code == 0 and rep["results"]["kind"] == "lattice" and len(rep["results"]["witness"]) == 4


def test_duality_rejects_other_documents(tmp_path, capsys):
    code, _, _ = run(capsys, "duality", write(tmp_path, "o.json", {"cover": []}))
    assert code == 2


def test_sheafify_constant_presheaf(tmp_path, capsys):
    P = constant_presheaf(discrete(3), ["a", "b"])
    code, rep = run_json(capsys, "sheafify", write(tmp_path, "p.json", P.to_doc()))
    assert code == 0
    r = rep["results"]
    assert not r["input_is_sheaf"] and r["plus_is_sheaf"] and r["stalk_sizes"] == [2, 2, 2]
    F = docs.parse_set_sheaf(r["sheaf"])
    assert is_sheaf(F.sections_presheaf())


def test_nerve_of_minimal_opens(tmp_path, capsys):
    p = write(tmp_path, "x.json", pseudo_circle().to_doc())
    code, rep = run_json(capsys, "nerve", p)
    assert code == 0 and rep["results"]["homology"][:2] == ["Z", "0"]
    c = write(tmp_path, "c.json", {"cover": [[0, 2, 3], [1, 2, 3]]})
    code, rep = run_json(capsys, "nerve", p, c)
    assert rep["results"]["nerve"]["J"] == [[0], [1], [0, 1]]


def test_nerve_rejects_non_cover(tmp_path, capsys):
    p = write(tmp_path, "x.json", pseudo_circle().to_doc())
    c = write(tmp_path, "c.json", {"cover": [[2], [3]]})
    assert run(capsys, "nerve", p, c)[0] == 2


def test_refine_cover_disc3(tmp_path, capsys):
    p = write(tmp_path, "x.json", discrete(3).to_doc())
    d = write(tmp_path, "r.json", {"cover": [[0, 1], [1, 2]], "k": 1, "subcovers": {"0,1": [[1]]}})
    code, rep = run_json(capsys, "refine-cover", p, d)
    assert code == 0 and rep["assertions"]["core_conditions"]
    assert {m["refines"] for m in rep["results"]["cover"]} == {0, 1}


def test_refine_cover_postcondition_failure_exits_1(tmp_path, capsys):
    p = write(tmp_path, "x.json", discrete(2).to_doc())
    doc = {"cover": [[0, 1]] * 3, "k": 1, "subcovers": {"0,2": [[0, 1]], "1,2": [[0, 1]], "0,1": [[0], [1]]}}
    code, rep = run_json(capsys, "refine-cover", p, write(tmp_path, "r.json", doc))
    assert code == 1 and not rep["ok"]


def test_audit_sweep(capsys):
    code, rep = run_json(capsys, "audit", "--points", "6", "--trials", "100", "--seed", "1")
    assert code == 0 and rep["results"]["summary"] == "100/100 pass" and rep["seed"] == 1


def test_audit_cap(capsys):
    code, _, err = run(capsys, "audit", "--points", "9")
    assert code == 2 and "TooLarge" in err


def test_reports_are_deterministic(tmp_path, capsys):
    p = write(tmp_path, "x.json", pseudo_circle().to_doc())
    f = write(tmp_path, "f.json", constant_ab(pseudo_circle(), Z).to_doc())
    for argv in (("cohomology", p, f), ("audit", "--trials", "20", "--seed", "3")):
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
        assert run(capsys, *argv, "--json")[1] == run(capsys, *argv, "--json")[1]


def test_duration_only_with_timing(tmp_path, capsys):
    p = write(tmp_path, "s.json", sierpinski().to_doc())
    _, rep = run_json(capsys, "dim", p)
    assert "duration_s" not in rep
    _, rep = run_json(capsys, "dim", p, "--timing")
    assert rep["duration_s"] >= 0


def test_text_report_is_aligned(tmp_path, capsys):
    _, out, _ = run(capsys, "dim", write(tmp_path, "s.json", sierpinski().to_doc()))
    lines = out.splitlines()
    cols = {len(line) - len(line.split("  ")[-1].lstrip()) for line in lines}
    assert len(cols) == 1 and lines[0].startswith("command")


def test_stdin_documents(monkeypatch, capsys):
    import io
    import sys

    raw = json.dumps(sierpinski().to_doc()).encode()
    monkeypatch.setattr(sys, "stdin", type("S", (), {"buffer": io.BytesIO(raw)})())
    code, rep = run_json(capsys, "dim", "-")
    assert code == 0 and rep["inputs"]["-"]


# documents


def test_presheaf_document_round_trip():
    rng = random.Random(6)
    for _ in range(10):
        X = pseudo_circle()
        P = random_presheaf(rng, X)
        Q = docs.parse_presheaf(P.to_doc())
        assert all(len(Q.values[U]) == len(P.values[U]) for U in P.opens)
        assert all(Q.r(U, V) == P.r(U, V) for (U, V) in P.res)


def test_abelian_sheaf_document_round_trip():
    rng = random.Random(2)
    X = pseudo_circle()
    for _ in range(10):
        F = random_ab_sheaf(rng, X)
        G = docs.parse_ab_sheaf(json.loads(json.dumps(F.to_doc())), X)
        assert G.stalks == F.stalks and all(G.g(x, y) == F.g(x, y) for x, y in X.covering_pairs)


def test_set_sheaf_document_errors():
    doc = {"space": sierpinski().to_doc(), "stalks": [["a"], ["b"]], "gen": {"0,1": ["zz"]}}
    with pytest.raises(ParseError):
        docs.parse_set_sheaf(doc)
    doc["gen"] = {"0,1": ["b"]}
    F = docs.parse_set_sheaf(doc)
    assert find_isomorphism(F, docs.parse_set_sheaf(F.to_doc())) is not None


def test_simplicial_document_round_trip():
    rng = random.Random(8)
    for _ in range(15):
        X = random_simplicial_set(rng, 6, 3)
        Y = docs.parse_simplicial(json.loads(json.dumps(X.to_doc())))
        assert find_simplicial_isomorphism(X, Y) is not None


def test_comb_complex_document():
    K = docs.parse_comb_complex({"V": [0, 1, 2], "J": [[0, 1], [1, 2]]})
    assert K.dimension == 1
    with pytest.raises(ParseError):
        docs.parse_comb_complex({"V": [0]})
