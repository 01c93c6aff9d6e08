"""Command-line front end.

Every subcommand builds a ``Report``; ``main`` prints it as aligned text or,
with ``--json``, as a sorted-key document. Exit codes: 0 success, 1 failed
assertion, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import docs
from .cohomology import cohomology, nerve_complex, vanishing_audit
from .errors import FinTopError, ParseError, TooLarge
from .finposet import (
    Cover,
    covering_dimension,
    heyting_dimension,
    krull_dimension,
    refine_cover_core,
)
from .generators import random_ab_sheaf, random_space
from .lattice import check_duality, check_duality_space, open_lattice
from .sheaf import SetSheaf, is_separated, is_sheaf, plus_construction, sheafify_plus
from .simplicial import homology, nerve_complex_of_cover, realize

AUDIT_MAX_POINTS = 8


@dataclass
class Report:
    command: list[str]
    inputs: dict[str, str] = field(default_factory=dict)
    results: dict[str, Any] = field(default_factory=dict)
    assertions: dict[str, bool] = field(default_factory=dict)
    seed: int | None = None
    duration: float | None = None

    @property
    def ok(self) -> bool:
        return all(self.assertions.values())

    def to_doc(self) -> dict:
        doc = {
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "assertions": self.assertions,
            "ok": self.ok,
        }
        if self.seed is not None:
            doc["seed"] = self.seed
        if self.duration is not None:
            doc["duration_s"] = round(self.duration, 6)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), sort_keys=True, indent=2)

    def to_text(self) -> str:
        rows: list[tuple[str, str]] = [("command", " ".join(self.command))]
        rows += [(f"input {k}", v) for k, v in sorted(self.inputs.items())]
        if self.seed is not None:
            rows.append(("seed", str(self.seed)))
        for k, v in sorted(self.results.items()):
            rows.append((k, v if isinstance(v, str) else json.dumps(v, sort_keys=True)))
        for k, v in sorted(self.assertions.items()):
            rows.append((f"assert {k}", "pass" if v else "FAIL"))
        if self.duration is not None:
            rows.append(("duration", f"{self.duration:.3f}s"))
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _load(report: Report, path: str) -> Any:
    doc, digest = docs.read_document(path)
    report.inputs[path] = digest
    return doc


def _groups(H) -> list[str]:
    return [str(g) for g in H]


def cmd_dim(args, report: Report) -> None:
    X = docs.parse_poset(_load(report, args.poset))
    k, h = krull_dimension(X), heyting_dimension(X)
    report.results.update(krull=k, heyting=h, covering=covering_dimension(X))
    report.assertions["krull_equals_heyting"] = k == h


def cmd_cohomology(args, report: Report) -> None:
    X = docs.parse_poset(_load(report, args.poset))
    F = docs.parse_ab_sheaf(_load(report, args.sheaf), X)
    H = cohomology(nerve_complex(X, F))
    top = X.n if args.max_degree is None else args.max_degree
    H = (H + [None] * (top + 1))[: top + 1]
    report.results["cohomology"] = {f"H^{k}": (str(g) if g is not None else "0") for k, g in enumerate(H)}
    report.results["krull_dimension"] = krull_dimension(X)
    try:
        vanishing_audit(X, F)
        report.assertions["vanishing_above_krull"] = True
    except AssertionError as e:
        report.results["violation"] = str(e)
        report.assertions["vanishing_above_krull"] = False


def cmd_duality(args, report: Report) -> None:
    doc = _load(report, args.doc)
    if isinstance(doc, dict) and "elements" in doc:
        L = docs.parse_lattice(doc)
        chk = check_duality(L)
        report.results["kind"] = "lattice"
        # element -> index of the matching open of its spectrum
        report.results["witness"] = {str(x): y for x, y in sorted(chk.witness.items())}
    elif isinstance(doc, dict) and "points" in doc:
        X = docs.parse_poset(doc)
        chk = check_duality_space(X)
        report.results["kind"] = "poset"
        # point -> index of the join-irreducible up(x) in the open lattice
        report.results["witness"] = {str(x): y for x, y in sorted(chk.witness.items())}
    else:
        raise ParseError("expected a lattice document (elements, leq) or a poset document (points, le)")
    if chk.counterexample is not None:
        report.results["counterexample"] = repr(chk.counterexample)
    report.assertions["duality_isomorphism"] = chk.ok


def _relabel(F: SetSheaf) -> SetSheaf:
    stalks = [[f"{x}.{i}" for i in range(len(s))] for x, s in enumerate(F.stalks)]
    return SetSheaf(F.space, stalks, {e: F.gen[e] for e in F.space.covering_pairs})


def cmd_sheafify(args, report: Report) -> None:
    P = docs.parse_presheaf(_load(report, args.presheaf))
    Q, _ = plus_construction(P)
    F, _ = sheafify_plus(P)
    report.results.update(
        input_is_sheaf=is_sheaf(P),
        input_is_separated=is_separated(P),
        plus_is_sheaf=is_sheaf(Q),
        stalk_sizes=[len(s) for s in F.stalks],
        sheaf=_relabel(F).to_doc(),
    )
    report.assertions["result_is_sheaf"] = is_sheaf(F.sections_presheaf())


def cmd_nerve(args, report: Report) -> None:
    X = docs.parse_poset(_load(report, args.poset))
    if args.cover is None:
        cover = Cover(X, [frozenset(i for i in range(X.n) if X.leq(x, i)) for x in range(X.n)])
        report.results["cover"] = "minimal opens"
    else:
        cover = docs.parse_cover(_load(report, args.cover), X)
    K = nerve_complex_of_cover(cover)
    d_max = K.dimension + 2 if args.d_max is None else args.d_max
    N = realize(K, d_max=d_max)
    report.results["nerve"] = K.to_doc()
    report.results["homology"] = _groups(homology(N))


def _plain(label):
    if isinstance(label, (tuple, list)):
        return [_plain(v) for v in label]
    if isinstance(label, frozenset):
        return sorted(label)
    return label


def cmd_refine_cover(args, report: Report) -> None:
    X = docs.parse_poset(_load(report, args.poset))
    cover, k, subs = docs.parse_refinement(_load(report, args.doc), X)
    try:
        new, pi = refine_cover_core(X, cover, k, subs)
    except AssertionError as e:
        report.results["failure"] = str(e)
        report.assertions["core_conditions"] = False
        return
    report.results["cover"] = [
        {"label": _plain(lab), "open": sorted(m.members), "refines": pi[lab]}
        for lab, m in zip(new.labels, new.members)
    ]
    report.assertions["core_conditions"] = True


def cmd_audit(args, report: Report) -> None:
    if args.points > AUDIT_MAX_POINTS:
        raise TooLarge(f"--points is capped at {AUDIT_MAX_POINTS}")
    if args.points < 1 or args.trials < 0:
        raise ParseError("--points must be positive and --trials non-negative")
    report.seed = args.seed
    rng = random.Random(args.seed)
    failures: list[dict] = []
    for t in range(args.trials):
        X = random_space(rng, args.points)
        F = random_ab_sheaf(rng, X)
        checks = {
            "krull_equals_heyting": krull_dimension(X) == heyting_dimension(X),
            "space_duality": check_duality_space(X).ok,
            "lattice_duality": check_duality(open_lattice(X)).ok,
        }
        try:
            vanishing_audit(X, F)
            checks["vanishing"] = True
        except AssertionError:
            checks["vanishing"] = False
        bad = sorted(k for k, v in checks.items() if not v)
        if bad:
            failures.append({"trial": t, "failed": bad, "space": X.to_doc()})
    passed = args.trials - len(failures)
    report.results["summary"] = f"{passed}/{args.trials} pass"
    report.results["failures"] = failures
    report.assertions["all_trials_pass"] = not failures


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fintopos", description="Finite spaces, sheaves and simplicial tools.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a machine-readable report")
    common.add_argument("--timing", action="store_true", help="include wall-clock duration in the report")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dim", parents=[common], help="Krull, Heyting and covering dimension")
    s.add_argument("poset")
    s.set_defaults(run=cmd_dim)

    s = sub.add_parser("cohomology", parents=[common], help="sheaf cohomology with vanishing check")
    s.add_argument("poset")
    s.add_argument("sheaf")
    s.add_argument("--max-degree", type=int)
    s.set_defaults(run=cmd_cohomology)

    s = sub.add_parser("duality", parents=[common], help="lattice/space duality round trip")
    s.add_argument("doc")
    s.set_defaults(run=cmd_duality)

    s = sub.add_parser("sheafify", parents=[common], help="sheafify a presheaf")
    s.add_argument("presheaf")
    s.set_defaults(run=cmd_sheafify)

    s = sub.add_parser("nerve", parents=[common], help="nerve of a cover and its homology")
    s.add_argument("poset")
    s.add_argument("cover", nargs="?")
    s.add_argument("--d-max", type=int)
    s.set_defaults(run=cmd_nerve)

    s = sub.add_parser("audit", parents=[common], help="seeded sweep of the dimension and duality checks")
    s.add_argument("--points", type=int, default=6)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=1)
    s.set_defaults(run=cmd_audit)

    s = sub.add_parser("refine-cover", parents=[common], help="core refinement of a cover")
    s.add_argument("poset")
    s.add_argument("doc")
    s.set_defaults(run=cmd_refine_cover)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    report = Report(command=argv)
    start = time.perf_counter()
    try:
        args.run(args, report)
    except AssertionError as e:
        print(f"assertion failed: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except (FinTopError, ValueError) as e:
        # bad documents, mismatched spaces, oversized requests
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    if args.timing:
        report.duration = time.perf_counter() - start
    print(report.to_json() if args.json else report.to_text())
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
