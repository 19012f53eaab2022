"""Command-line front end.

Commands: ``validate``, ``homology``, ``quillen``, ``der``, ``ss``, ``loop``,
``aut``, ``hochschild``.  Models are file paths or ``builtin:NAME``.  Output
is an aligned text table (default) or line-delimited JSON records
(``--format records``); records are byte-stable across runs.  Exit status is
0 on success, 1 on validation or input failure, 2 on usage errors.

Bidegree conventions for page tables: ``internal`` puts a class of filtration
level s and total degree n at (s, t) = (s, n − s) with d_r of bidegree
(r, 1 − r); ``flipped`` prints (s, −t) with d_r moving (r, r − 1), matching
homological cell/loop bidegrees; ``relabeled`` prints (σ, τ) = (s, 2s + t)
with d_r moving (r, r + 1), matching maps from degree-σ generators into
degree-τ cohomology.  When ``--convention`` is omitted, ``ss`` prints
``internal`` plus the family-appropriate second table.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .derivations import ConeComplex
from .models import (
    CellCoalgebra,
    ModelFile,
    ModelSyntaxError,
    aut_homotopy,
    builtin_names,
    derivation_tower,
    load_model,
    loop_homology,
    model_family,
    multiplicativity_check,
    print_model,
    tower_report,
    validate_model,
)
from .tower import SpectralSequence, cone_tower

TABLE = "table"
RECORDS = "records"


class CliError(Exception):
    """An input or validation failure: message printed, exit status 1."""


class UsageError(Exception):
    """A flag-level mistake: message printed, exit status 2."""


def _parse_pages(text: str) -> list[int]:
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            pages = list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise UsageError(f"bad page range {text!r}") from None
    else:
        try:
            pages = [int(p) for p in text.split(",")]
        except ValueError:
            raise UsageError(f"bad page list {text!r}") from None
    if not pages or any(p < 1 for p in pages):
        raise UsageError("page numbers start at 1")
    return pages


def _load(spec_text: str) -> ModelFile:
    try:
        return load_model(spec_text)
    except (ModelSyntaxError, ValueError) as exc:
        raise CliError(str(exc)) from None
    except OSError as exc:
        raise CliError(f"cannot read model: {exc}") from None


def _validated(spec_text: str) -> ModelFile:
    mf = _load(spec_text)
    report = validate_model(mf)
    if not report.ok:
        raise CliError(
            "invalid model:\n" + "\n".join(report.lines())
        )
    return mf


class Output:
    """Collects table lines or record dicts, then prints one of them."""

    def __init__(self, mode: str, command: str, model: str) -> None:
        self.mode = mode
        self.command = command
        self.model = model
        self.lines: list[str] = []
        self.records: list[dict] = []

    def line(self, text: str = "") -> None:
        self.lines.append(text)

    def record(self, **fields) -> None:
        base = {"command": self.command, "model": self.model}
        base.update(fields)
        self.records.append(base)

    def emit(self) -> None:
        if self.mode == RECORDS:
            for rec in self.records:
                print(json.dumps(rec, sort_keys=True, default=str))
        else:
            for text in self.lines:
                print(text)


def _dims_rows(out: Output, label: str, dims: dict[int, int], key: str = "degree") -> None:
    out.line(f"{label}:")
    for n in sorted(dims):
        out.line(f"  {key} {n:>3}: {dims[n]}")
        out.record(**{key: n, "dimension": dims[n], "table": label})


def _page_rows(
    out: Output,
    convention: str,
    r: int,
    table: dict[tuple[int, int], int],
) -> None:
    out.line(f"page {r} [{convention}]:")
    if not table:
        out.line("  (empty)")
    for (s, t) in sorted(table):
        out.line(f"  ({s}, {t}): {table[(s, t)]}")
        out.record(r=r, s=s, t=t, dimension=table[(s, t)], convention=convention)


def _assembly_rows(out: Output, assembly: dict[int, tuple[int, int, bool]]) -> bool:
    ok_all = True
    out.line("assembly (sum of stable entries vs. direct cohomology):")
    for n in sorted(assembly):
        total, direct, ok = assembly[n]
        ok_all = ok_all and ok
        flag = "ok" if ok else "MISMATCH"
        out.line(f"  degree {n:>3}: {total} vs {direct} {flag}")
        out.record(
            degree=n, assembled=total, direct=direct, ok=ok, table="assembly"
        )
    return ok_all


# ------------------------------------------------------------- subcommands


def cmd_validate(args: argparse.Namespace) -> int:
    mf = _load(args.model)
    report = validate_model(mf, window=args.window)
    out = Output(args.format, "validate", mf.name or args.model)
    for text in report.lines():
        out.line(text)
    for check in report.checks:
        out.record(check=check.name, ok=check.ok, detail=check.detail)
    out.emit()
    return 0 if report.ok else 1


def cmd_homology(args: argparse.Namespace) -> int:
    mf = _validated(args.model)
    algebra = mf.algebra()
    from .models import algebra_homology_dims

    dims = algebra_homology_dims(algebra, list(range(0, args.window + 1)))
    out = Output(args.format, "homology", mf.name or args.model)
    _dims_rows(out, f"algebra homology of {mf.name or args.model}", dims)
    out.emit()
    return 0


def cmd_quillen(args: argparse.Namespace) -> int:
    mf = _validated(args.model)
    algebra = mf.algebra()
    from .models import quillen_dims

    dims = quillen_dims(algebra, list(range(1, args.window + 1)))
    out = Output(args.format, "quillen", mf.name or args.model)
    _dims_rows(out, "generator-level homology (linear part)", dims)
    if model_family(mf) == "cellular":
        cells = {}
        for g in mf.generators:
            cells[g.degree + 1] = cells.get(g.degree + 1, 0) + 1
        _dims_rows(out, "cells per dimension", cells, key="dimension")
    out.emit()
    return 0


def cmd_der(args: argparse.Namespace) -> int:
    mf = _validated(args.model)
    target = _validated(args.target) if args.target else None
    coefficients = "target" if target is not None else "self"
    der, _ = derivation_tower(mf, coefficients, target)
    if args.range:
        lo_text, _, hi_text = args.range.partition("..")
        try:
            lo, hi = int(lo_text), int(hi_text)
        except ValueError:
            raise UsageError(f"bad degree range {args.range!r}") from None
    else:
        lo, hi = -args.window, args.window
    cx = der.complex()
    dims = {n: cx.homology(n).dim for n in range(lo, hi + 1)}
    out = Output(args.format, "der", mf.name or args.model)
    vanish = f" fixing {sorted(mf.base_names())}" if mf.base_names() else ""
    _dims_rows(out, f"derivation cohomology{vanish} ({coefficients} coefficients)", dims)
    if args.reps:
        out.line("representatives:")
        for n in range(lo, hi + 1):
            h = cx.homology(n)
            for i, rep in enumerate(h.representatives):
                text = der.format_values(der.values_of_vector(rep, n))
                out.line(f"  degree {n}, class {i}: {text}")
                out.record(degree=n, index=i, representative=text)
    out.emit()
    return 0


def cmd_ss(args: argparse.Namespace) -> int:
    mf = _validated(args.model)
    target = None
    coefficients = args.coefficients
    if coefficients.startswith("target="):
        target = _validated(coefficients[len("target=") :])
        coefficients = "target"
    elif coefficients not in ("self", "trivial"):
        raise UsageError(
            f"--coefficients must be self, trivial or target=PATH, not {coefficients!r}"
        )
    pages = _parse_pages(args.pages)
    report = tower_report(
        mf,
        coefficients,
        target,
        window=args.window,
        pages=pages,
        check_collapse=args.check_collapse,
    )
    out = Output(args.format, "ss", mf.name or args.model)
    conventions = (
        [args.convention]
        if args.convention
        else ["internal", "relabeled" if model_family(mf) == "sullivan" else "flipped"]
    )
    for r in pages:
        for convention in conventions:
            table = {
                "internal": report.pages_internal,
                "flipped": report.pages_flipped,
                "relabeled": report.pages_relabeled,
            }[convention][r]
            _page_rows(out, convention, r, table)
    out.line(f"stable page: {report.stable_page}")
    ok = _assembly_rows(out, report.assembly)
    if args.check_collapse and report.collapse is not None:
        col = report.collapse
        out.line(
            "collapse: "
            + (
                f"predicted at page {col.predicted_page} ({col.reason}); "
                f"verified: {col.verified}"
                if col.predicted_page is not None
                else "no single-row or single-column prediction"
            )
        )
        out.record(table="collapse", **col.as_record())
        if col.predicted_page is not None and not col.verified:
            ok = False
    if args.check_multiplicative:
        if not args.diag:
            raise UsageError("--check-multiplicative requires --diag primitive|model")
        algebra = mf.algebra()
        pairs = {} if args.diag == "primitive" else mf.diagonals
        try:
            coalg = CellCoalgebra(algebra, pairs)
        except ValueError as exc:
            raise CliError(str(exc)) from None
        mult = multiplicativity_check(algebra, coalg, window=args.window)
        verdict = "ok" if mult.ok else "FAILS"
        out.line(
            f"first-page product rule over {mult.pairs_checked} pairs: {verdict}"
        )
        for failure in mult.failures:
            out.line(f"  fails on {failure}")
        out.record(
            table="multiplicativity", pairs=mult.pairs_checked, ok=mult.ok
        )
        ok = ok and mult.ok
    out.emit()
    return 0 if ok else 1


def cmd_loop(args: argparse.Namespace) -> int:
    mf = _validated(args.model)
    pages = _parse_pages(args.pages) if args.pages else ()
    try:
        report = loop_homology(mf, window=args.max_degree, pages=pages)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = Output(args.format, "loop", mf.name or args.model)
    _dims_rows(out, "free-loop-space homology", report.betti)
    for r in pages:
        _page_rows(out, "flipped", r, report.pages[r])
    out.line("second page vs hom(cells, loop homology):")
    keys = sorted(set(report.e2_engine) | set(report.e2_expected))
    for key in keys:
        got = report.e2_engine.get(key, 0)
        want = report.e2_expected.get(key, 0)
        flag = "ok" if got == want else "MISMATCH"
        out.line(f"  {key}: {got} vs {want} {flag}")
        out.record(s=key[0], t=key[1], engine=got, expected=want, table="e2")
    ok = _assembly_rows(out, report.assembly)
    out.emit()
    return 0 if ok and report.ok else 1


def cmd_aut(args: argparse.Namespace) -> int:
    mf = _validated(args.model)
    pages = _parse_pages(args.pages) if args.pages else ()
    try:
        report = aut_homotopy(mf, window=args.window, pages=pages)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = Output(args.format, "aut", mf.name or args.model)
    _dims_rows(out, "homotopy of the identity component of self-equivalences", report.dims)
    out.line(f"degree-zero classes (not part of the table): {report.degree_zero_dim}")
    out.line("hom-shaped table (fiber degree σ vs cohomology degree τ):")
    for key in sorted(report.hom_shaped):
        out.line(f"  {key}: {report.hom_shaped[key]}")
        out.record(s=key[0], t=key[1], dimension=report.hom_shaped[key], table="hom")
    for r in pages:
        _page_rows(out, "internal", r, report.pages_internal[r])
        _page_rows(out, "relabeled", r, report.pages_relabeled[r])
    if args.brackets:
        out.line("brackets on classes:")
        for entry in report.brackets:
            out.line(f"  {entry.text}")
            out.record(
                table="bracket",
                degree_a=entry.degree_a,
                index_a=entry.index_a,
                degree_b=entry.degree_b,
                index_b=entry.index_b,
                coords=entry.coords,
            )
    ok = _assembly_rows(out, report.assembly) if report.assembly else True
    out.emit()
    return 0 if ok else 1


def cmd_hochschild(args: argparse.Namespace) -> int:
    mf = _validated(args.model)
    algebra = mf.algebra()
    cone = ConeComplex(algebra)
    fc = cone_tower(cone)
    ss = SpectralSequence(fc)
    degrees = list(range(-args.window, args.window + 1))
    pages = _parse_pages(args.pages) if args.pages else (1, 2)
    out = Output(args.format, "hochschild", mf.name or args.model)
    for r in pages:
        _page_rows(out, "internal", r, dict(sorted(ss.page_dims(r, degrees).items())))
    _page_rows(out, "internal", ss.stable_page, dict(sorted(ss.einf_dims(degrees).items())))
    dims = {n: cone.complex().homology(n).dim for n in degrees}
    _dims_rows(out, "cone cohomology", dims)
    ok = _assembly_rows(out, ss.total_degree_check(degrees))
    out.emit()
    return 0 if ok else 1


def cmd_print(args: argparse.Namespace) -> int:
    mf = _load(args.model)
    sys.stdout.write(print_model(mf))
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dgtangent",
        description=(
            "Exact-arithmetic tangent-cohomology workbench for quasi-free "
            "differential graded algebras: derivation complexes, generator-tower "
            "spectral sequences, free-loop-space homology, and the rational "
            "homotopy of fiberwise self-equivalences."
        ),
        epilog="Builtin models: " + ", ".join(builtin_names()),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, window_default: int = 10) -> None:
        p.add_argument("model", help="model file path or builtin:NAME")
        p.add_argument(
            "--window", type=int, default=window_default, metavar="N",
            help=f"degree window (default {window_default})",
        )
        p.add_argument(
            "--format", choices=(TABLE, RECORDS), default=TABLE,
            help="aligned table or line-delimited JSON records",
        )

    p = sub.add_parser("validate", help="run all structural checks")
    common(p, window_default=12)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("homology", help="algebra homology dimensions")
    common(p)
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("quillen", help="generator-level (indecomposable) homology")
    common(p)
    p.set_defaults(func=cmd_quillen)

    p = sub.add_parser("der", help="derivation cohomology dimensions")
    common(p)
    p.add_argument("--target", metavar="MODEL", help="coefficient target model")
    p.add_argument("--range", metavar="A..B", help="explicit degree range")
    p.add_argument("--reps", action="store_true", help="print class representatives")
    p.set_defaults(func=cmd_der)

    p = sub.add_parser("ss", help="spectral-sequence pages of the derivation tower")
    common(p)
    p.add_argument(
        "--coefficients", default="self", metavar="C",
        help="self, trivial, or target=MODEL (default self)",
    )
    p.add_argument("--pages", default="1..6", metavar="A..B", help="pages to print")
    p.add_argument(
        "--convention", choices=("internal", "flipped", "relabeled"),
        help="bidegree labels (default: internal plus the family-appropriate one)",
    )
    p.add_argument(
        "--check-collapse", action="store_true",
        help="detect single-row/column degeneration and verify it",
    )
    p.add_argument(
        "--check-multiplicative", action="store_true",
        help="check the first-page product rule for the convolution product",
    )
    p.add_argument(
        "--diag", choices=("primitive", "model"),
        help="diagonal data for --check-multiplicative",
    )
    p.set_defaults(func=cmd_ss)

    p = sub.add_parser("loop", help="free-loop-space homology of a cellular model")
    p.add_argument("model", help="model file path or builtin:NAME")
    p.add_argument(
        "--max-degree", type=int, default=10, metavar="N",
        help="largest loop degree reported (default 10)",
    )
    p.add_argument("--pages", metavar="A..B", help="also print these pages")
    p.add_argument("--format", choices=(TABLE, RECORDS), default=TABLE)
    p.set_defaults(func=cmd_loop)

    p = sub.add_parser(
        "aut", help="rational homotopy of fiberwise self-equivalences"
    )
    common(p)
    p.add_argument("--pages", metavar="A..B", help="also print these pages")
    p.add_argument("--brackets", action="store_true", help="print bracket tables")
    p.set_defaults(func=cmd_aut)

    p = sub.add_parser("hochschild", help="adjoint-cone tower of a model")
    common(p, window_default=8)
    p.add_argument("--pages", metavar="A..B", help="pages to print (default 1..2)")
    p.set_defaults(func=cmd_hochschild)

    p = sub.add_parser("print", help="canonical text form of a model")
    p.add_argument("model", help="model file path or builtin:NAME")
    p.set_defaults(func=cmd_print)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "window", 1) < 1 or getattr(args, "max_degree", 1) < 1:
        parser.error("the degree window must be at least 1")
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
