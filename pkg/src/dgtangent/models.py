"""Model files: grammar, builtin library, validation, and high-level reports.

The model grammar is line-oriented UTF-8 with ``#`` comments:

    name TEXT                        optional metadata
    description TEXT                 optional metadata
    flavor associative|commutative
    grading homological|cohomological
    gen NAME : INT [stage INT] [base]
    d NAME = EXPR
    diag NAME = DEXPR

EXPR is ``0`` or a sum of terms joined by ``+``/``-``; each term is
``[RATIONAL *] NAME[^INT] (NAME[^INT])*`` with rationals written ``p`` or
``p/q``; ``1`` denotes the unit.  DEXPR is a sum of terms
``[RATIONAL *] NAME ⊗ NAME``; the ASCII spelling ``(x)`` is accepted for
``⊗`` on input and ``⊗`` is canonical on output.  Every generator's
differential defaults to 0.  Names match ``[A-Za-z_][A-Za-z0-9_]*``.

Two model families get extra validation and reports: homological associative
models ("cellular models": one cell of dimension degree + 1 per generator)
and cohomological commutative models, optionally relative via ``base``
generator flags.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import groupby
from typing import Sequence

from .algebra import (
    Element,
    FreeDgAlgebra,
    Generator,
    KIND_COMMUTATIVE,
    KIND_TENSOR,
    el_add,
    el_add_term,
    tilde_extension,
)
from .complexes import GRADING_COHOMOLOGICAL, GRADING_HOMOLOGICAL
from .derivations import Coefficients, ConeComplex, DerComplex, Values
from .linalg import Matrix
from .tower import (
    FilteredComplex,
    SpectralSequence,
    collapse_report,
    cone_tower,
    der_tower,
)

KIND_OF_FLAVOR = {"associative": KIND_TENSOR, "commutative": KIND_COMMUTATIVE}
FLAVORS = tuple(KIND_OF_FLAVOR)
GRADINGS = (GRADING_HOMOLOGICAL, GRADING_COHOMOLOGICAL)

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_EXPR_TOKEN_RE = re.compile(
    r"\s*(\d+/\d+|\d+|[A-Za-z_][A-Za-z0-9_]*|\^|\*|\+|-|⊗|\(x\))"
)


class ModelSyntaxError(ValueError):
    """A model file failed to parse; carries the offending line number."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class DiagTerm:
    """One reduced-diagonal summand: coeff · (left ⊗ right)."""

    coeff: Fraction
    left: str
    right: str


@dataclass
class ModelFile:
    """Parsed model: flavor, grading, generators, d, optional diagonals."""

    flavor: str
    grading: str
    generators: list[Generator]
    differentials: dict[str, Element]
    diagonals: dict[str, list[DiagTerm]]
    name: str = ""
    description: str = ""
    _algebra: FreeDgAlgebra | None = field(
        default=None, compare=False, repr=False
    )

    # ------------------------------------------------------------ structure

    def base_names(self) -> frozenset[str]:
        return frozenset(g.name for g in self.generators if g.role == "base")

    def fiber_generators(self) -> list[Generator]:
        return [g for g in self.generators if g.role != "base"]

    def kind(self) -> str:
        return KIND_OF_FLAVOR[self.flavor]

    def build(self) -> FreeDgAlgebra:
        """Construct the algebra afresh, validating the differential."""
        algebra = FreeDgAlgebra(
            self.kind(), self.grading, list(self.generators), name=self.name or "model"
        )
        for gen in self.generators:
            value = self.differentials.get(gen.name, {})
            if value:
                algebra.set_differential(gen.name, dict(value))
        return algebra

    def algebra(self) -> FreeDgAlgebra:
        if self._algebra is None:
            self._algebra = self.build()
        return self._algebra


def model_family(mf: ModelFile) -> str:
    """"cellular" / "sullivan" / "generic" according to flavor and grading."""
    if mf.flavor == "associative" and mf.grading == GRADING_HOMOLOGICAL:
        return "cellular"
    if mf.flavor == "commutative" and mf.grading == GRADING_COHOMOLOGICAL:
        return "sullivan"
    return "generic"


# ---------------------------------------------------------------- parsing


def _tokenize_expression(text: str, line_no: int) -> list[str]:
    tokens: list[str] = []
    pos = 0
    while pos < len(text):
        match = _EXPR_TOKEN_RE.match(text, pos)
        if match is None:
            if text[pos:].strip():
                raise ModelSyntaxError(
                    line_no, f"unexpected character {text[pos:].strip()[0]!r}"
                )
            break
        token = match.group(1)
        tokens.append("⊗" if token == "(x)" else token)
        pos = match.end()
    return tokens


def _parse_rational(token: str) -> Fraction:
    if "/" in token:
        num, den = token.split("/")
        return Fraction(int(num), int(den))
    return Fraction(int(token))


def _parse_terms(
    tokens: list[str], line_no: int
) -> list[tuple[Fraction, list[str]]]:
    """Shared sum-of-terms parser: (coefficient, factor names with powers expanded)."""
    terms: list[tuple[Fraction, list[str]]] = []
    sign = Fraction(1)
    pos = 0

    def error(msg: str) -> ModelSyntaxError:
        return ModelSyntaxError(line_no, msg)

    while pos < len(tokens):
        token = tokens[pos]
        if token == "+":
            sign = Fraction(1)
            pos += 1
            continue
        if token == "-":
            sign = -sign
            pos += 1
            continue
        coeff = sign
        factors: list[str] = []
        if re.fullmatch(r"\d+(/\d+)?", token):
            coeff *= _parse_rational(token)
            pos += 1
            if pos < len(tokens) and tokens[pos] == "*":
                pos += 1
        while pos < len(tokens) and (
            NAME_RE.fullmatch(tokens[pos]) or tokens[pos] == "⊗"
        ):
            if tokens[pos] == "⊗":
                factors.append("⊗")
                pos += 1
                continue
            name = tokens[pos]
            pos += 1
            power = 1
            if pos < len(tokens) and tokens[pos] == "^":
                pos += 1
                if pos >= len(tokens) or not tokens[pos].isdigit():
                    raise error("expected an integer exponent after ^")
                power = int(tokens[pos])
                if power < 1:
                    raise error("exponents must be >= 1")
                pos += 1
            factors.extend([name] * power)
        if pos < len(tokens) and tokens[pos] not in "+-":
            raise error(f"unexpected token {tokens[pos]!r}")
        terms.append((coeff, factors))
        sign = Fraction(1)
    return terms


def parse_expression(
    algebra: FreeDgAlgebra, text: str, line_no: int = 0
) -> Element:
    """Parse an EXPR into a normalized element of the algebra."""
    terms = _parse_terms(_tokenize_expression(text, line_no), line_no)
    out: Element = {}
    for coeff, factors in terms:
        if "⊗" in factors:
            raise ModelSyntaxError(line_no, "⊗ is only allowed in diag lines")
        if coeff == 0:
            continue
        for letter in factors:
            if letter not in algebra.generators:
                raise ModelSyntaxError(line_no, f"unknown generator {letter!r}")
        norm_sign, mono = algebra.normalize_monomial(tuple(factors))
        if mono is None:
            raise ModelSyntaxError(
                line_no, "square of an odd generator vanishes in a commutative algebra"
            )
        el_add_term(out, mono, coeff * norm_sign)
    return out


def parse_diagonal(
    algebra: FreeDgAlgebra, text: str, line_no: int = 0
) -> list[DiagTerm]:
    """Parse a DEXPR into combined, canonically ordered diagonal terms."""
    terms = _parse_terms(_tokenize_expression(text, line_no), line_no)
    combined: dict[tuple[str, str], Fraction] = {}
    for coeff, factors in terms:
        if factors.count("⊗") != 1:
            raise ModelSyntaxError(
                line_no, "each diagonal term must be NAME ⊗ NAME"
            )
        split = factors.index("⊗")
        left, right = factors[:split], factors[split + 1 :]
        if len(left) != 1 or len(right) != 1:
            raise ModelSyntaxError(
                line_no, "each diagonal term must be NAME ⊗ NAME"
            )
        for letter in (left[0], right[0]):
            if letter not in algebra.generators:
                raise ModelSyntaxError(line_no, f"unknown generator {letter!r}")
        key = (left[0], right[0])
        combined[key] = combined.get(key, Fraction(0)) + coeff
    letter_key = lambda n: (algebra.gen_degree(n), n)
    return [
        DiagTerm(c, a, b)
        for (a, b), c in sorted(
            combined.items(), key=lambda kv: (letter_key(kv[0][0]), letter_key(kv[0][1]))
        )
        if c != 0
    ]


def parse_model(text: str) -> ModelFile:
    """Parse a model file, raising ModelSyntaxError with a line number."""
    flavor: str | None = None
    grading: str | None = None
    name = ""
    description = ""
    generators: list[Generator] = []
    seen: set[str] = set()
    diff_lines: list[tuple[int, str, str]] = []
    diag_lines: list[tuple[int, str, str]] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "name":
            name = rest
        elif head == "description":
            description = rest
        elif head == "flavor":
            if rest not in FLAVORS:
                raise ModelSyntaxError(line_no, f"flavor must be one of {FLAVORS}")
            flavor = rest
        elif head == "grading":
            if rest not in GRADINGS:
                raise ModelSyntaxError(line_no, f"grading must be one of {GRADINGS}")
            grading = rest
        elif head == "gen":
            words = rest.replace(":", " : ").split()
            if len(words) < 3 or words[1] != ":":
                raise ModelSyntaxError(line_no, "expected `gen NAME : INT ...`")
            gen_name = words[0]
            if not NAME_RE.fullmatch(gen_name):
                raise ModelSyntaxError(line_no, f"bad generator name {gen_name!r}")
            if gen_name in seen:
                raise ModelSyntaxError(line_no, f"duplicate generator {gen_name!r}")
            try:
                degree = int(words[2])
            except ValueError:
                raise ModelSyntaxError(line_no, f"bad degree {words[2]!r}") from None
            stage: int | None = None
            role = ""
            pos = 3
            while pos < len(words):
                if words[pos] == "stage":
                    if pos + 1 >= len(words):
                        raise ModelSyntaxError(line_no, "stage requires an integer")
                    try:
                        stage = int(words[pos + 1])
                    except ValueError:
                        raise ModelSyntaxError(
                            line_no, f"bad stage {words[pos + 1]!r}"
                        ) from None
                    pos += 2
                elif words[pos] == "base":
                    role = "base"
                    pos += 1
                else:
                    raise ModelSyntaxError(
                        line_no, f"unexpected token {words[pos]!r} in gen line"
                    )
            seen.add(gen_name)
            generators.append(Generator(gen_name, degree, stage, role))
        elif head == "d":
            lhs, eq, rhs = rest.partition("=")
            if not eq:
                raise ModelSyntaxError(line_no, "expected `d NAME = EXPR`")
            diff_lines.append((line_no, lhs.strip(), rhs.strip()))
        elif head == "diag":
            lhs, eq, rhs = rest.partition("=")
            if not eq:
                raise ModelSyntaxError(line_no, "expected `diag NAME = DEXPR`")
            diag_lines.append((line_no, lhs.strip(), rhs.strip()))
        else:
            raise ModelSyntaxError(line_no, f"unknown directive {head!r}")

    if flavor is None:
        raise ModelSyntaxError(0, "missing `flavor` line")
    if grading is None:
        raise ModelSyntaxError(0, "missing `grading` line")

    try:
        bare = FreeDgAlgebra(
            KIND_OF_FLAVOR[flavor], grading, list(generators), name=name or "model"
        )
    except ValueError as exc:
        raise ModelSyntaxError(0, str(exc)) from None
    differentials: dict[str, Element] = {}
    for line_no, gen_name, expr in diff_lines:
        if gen_name not in seen:
            raise ModelSyntaxError(line_no, f"d for unknown generator {gen_name!r}")
        if gen_name in differentials:
            raise ModelSyntaxError(line_no, f"duplicate d line for {gen_name!r}")
        element = parse_expression(bare, expr, line_no)
        try:
            if element:
                bare.set_differential(gen_name, element)
        except ValueError as exc:
            raise ModelSyntaxError(line_no, str(exc)) from None
        differentials[gen_name] = element
    diagonals: dict[str, list[DiagTerm]] = {}
    for line_no, gen_name, expr in diag_lines:
        if gen_name not in seen:
            raise ModelSyntaxError(line_no, f"diag for unknown generator {gen_name!r}")
        if gen_name in diagonals:
            raise ModelSyntaxError(line_no, f"duplicate diag line for {gen_name!r}")
        terms = parse_diagonal(bare, expr, line_no)
        if terms:
            diagonals[gen_name] = terms

    mf = ModelFile(flavor, grading, generators, differentials, diagonals, name, description)
    mf._algebra = bare  # fully populated and validated above
    return mf


# ---------------------------------------------------------------- printing


def format_expression(algebra: FreeDgAlgebra, el: Element) -> str:
    """Canonical EXPR text for an element (powers grouped, sorted terms)."""
    if not el:
        return "0"
    parts: list[str] = []
    for mono in algebra.sorted_monomials(el):
        coeff = el[mono]
        magnitude = abs(coeff)
        if mono == ():
            term = str(magnitude)
        else:
            word = " ".join(
                letter if size == 1 else f"{letter}^{size}"
                for letter, size in (
                    (letter, len(list(run))) for letter, run in groupby(mono)
                )
            )
            term = word if magnitude == 1 else f"{magnitude} * {word}"
        if not parts:
            parts.append(term if coeff > 0 else f"-{term}")
        else:
            parts.append(f"{'+' if coeff > 0 else '-'} {term}")
    return " ".join(parts)


def format_diagonal(terms: Sequence[DiagTerm]) -> str:
    parts: list[str] = []
    for term in terms:
        magnitude = abs(term.coeff)
        body = f"{term.left} ⊗ {term.right}"
        text = body if magnitude == 1 else f"{magnitude} * {body}"
        if not parts:
            parts.append(text if term.coeff > 0 else f"-{text}")
        else:
            parts.append(f"{'+' if term.coeff > 0 else '-'} {text}")
    return " ".join(parts)


def print_model(mf: ModelFile) -> str:
    """Canonical text form; parse(print_model(m)) == m for normalized m."""
    algebra = FreeDgAlgebra(
        mf.kind(), mf.grading, list(mf.generators), name=mf.name or "model"
    )
    lines: list[str] = []
    if mf.name:
        lines.append(f"name {mf.name}")
    if mf.description:
        lines.append(f"description {mf.description}")
    lines.append(f"flavor {mf.flavor}")
    lines.append(f"grading {mf.grading}")
    for g in mf.generators:
        decl = f"gen {g.name} : {g.degree}"
        if g.stage is not None:
            decl += f" stage {g.stage}"
        if g.role == "base":
            decl += " base"
        lines.append(decl)
    for g in mf.generators:
        lines.append(
            f"d {g.name} = {format_expression(algebra, mf.differentials.get(g.name, {}))}"
        )
    for gen_name in sorted(
        mf.diagonals, key=lambda n: (algebra.gen_degree(n), n)
    ):
        lines.append(f"diag {gen_name} = {format_diagonal(mf.diagonals[gen_name])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- builtins

BUILTIN_PREFIXES = (
    "ah:sphere:",
    "ah:wedge:",
    "sullivan:sphere:odd:",
    "sullivan:sphere:even:",
    "sullivan:cpn:",
    "sullivan:hopf",
    "trivial-fibration:",
)


def builtin_names() -> list[str]:
    """Representative builtin names (the numeric families are open-ended)."""
    return [
        "ah:sphere:<n>",
        "ah:wedge:<n>,<m>",
        "sullivan:sphere:odd:<n>",
        "sullivan:sphere:even:<n>",
        "sullivan:cpn:<n>",
        "sullivan:hopf",
        "trivial-fibration:<sullivan builtin>",
    ]


def _builtin_int(name: str, text: str, minimum: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ValueError(f"bad parameter {text!r} in builtin {name!r}") from None
    if value < minimum:
        raise ValueError(f"builtin {name!r} requires parameter >= {minimum}")
    return value


def builtin(name: str) -> ModelFile:
    """The builtin model library, keyed by colon-separated names."""
    if name.startswith("trivial-fibration:"):
        inner = builtin(name[len("trivial-fibration:") :])
        if model_family(inner) != "sullivan":
            raise ValueError(
                "trivial-fibration wrappers apply to sullivan builtins only"
            )
        mf = ModelFile(
            inner.flavor,
            inner.grading,
            [replace(g, role="") for g in inner.generators],
            inner.differentials,
            inner.diagonals,
            name=name,
            description=f"{inner.name} as the fiber of a fibration over a point",
        )
        mf.algebra()
        return mf

    lines = [f"name {name}"]
    if name.startswith("ah:sphere:"):
        n = _builtin_int(name, name[len("ah:sphere:") :], 2)
        lines += [
            f"description loop-space model of the {n}-sphere",
            "flavor associative",
            "grading homological",
            f"gen x : {n - 1}",
            "d x = 0",
        ]
    elif name.startswith("ah:wedge:"):
        params = name[len("ah:wedge:") :].split(",")
        if len(params) != 2:
            raise ValueError(f"builtin {name!r} requires two parameters n,m")
        n = _builtin_int(name, params[0], 2)
        m = _builtin_int(name, params[1], 2)
        lines += [
            f"description loop-space model of a wedge of a {n}- and a {m}-sphere",
            "flavor associative",
            "grading homological",
            f"gen a : {n - 1}",
            f"gen b : {m - 1}",
            "d a = 0",
            "d b = 0",
        ]
    elif name.startswith("sullivan:sphere:odd:"):
        n = _builtin_int(name, name[len("sullivan:sphere:odd:") :], 3)
        if n % 2 == 0:
            raise ValueError(f"builtin {name!r} requires an odd degree")
        lines += [
            f"description minimal model of the odd {n}-sphere",
            "flavor commutative",
            "grading cohomological",
            f"gen x : {n}",
            "d x = 0",
        ]
    elif name.startswith("sullivan:sphere:even:"):
        n = _builtin_int(name, name[len("sullivan:sphere:even:") :], 2)
        if n % 2 == 1:
            raise ValueError(f"builtin {name!r} requires an even degree")
        lines += [
            f"description minimal model of the even {n}-sphere",
            "flavor commutative",
            "grading cohomological",
            f"gen x : {n}",
            f"gen y : {2 * n - 1}",
            "d x = 0",
            "d y = x^2",
        ]
    elif name.startswith("sullivan:cpn:"):
        n = _builtin_int(name, name[len("sullivan:cpn:") :], 1)
        lines += [
            f"description minimal model of complex projective {n}-space",
            "flavor commutative",
            "grading cohomological",
            "gen x : 2",
            f"gen y : {2 * n + 1}",
            "d x = 0",
            f"d y = x^{n + 1}" if n + 1 > 1 else "d y = x",
        ]
    elif name == "sullivan:hopf":
        lines += [
            "description circle bundle over the even 2-sphere with total space the 3-sphere",
            "flavor commutative",
            "grading cohomological",
            "gen x : 2 base",
            "gen y : 3 base",
            "gen z : 1",
            "d x = 0",
            "d y = x^2",
            "d z = x",
        ]
    else:
        raise ValueError(f"unknown builtin model {name!r}")
    return parse_model("\n".join(lines) + "\n")


def load_model(spec_text: str) -> ModelFile:
    """Resolve ``builtin:NAME`` or a file path into a parsed model."""
    if spec_text.startswith("builtin:"):
        return builtin(spec_text[len("builtin:") :])
    with open(spec_text, "r", encoding="utf-8") as handle:
        return parse_model(handle.read())


# ------------------------------------------------------------ cell coalgebra


class CellCoalgebra:
    """Reduced diagonal data on the cells of a homological cellular model.

    Each generator v names one cell of dimension deg(v) + 1; the reduced
    diagonal of that cell is a sum of tensor pairs of other cells.  Pairs
    default to empty (primitive cells).
    """

    def __init__(self, algebra: FreeDgAlgebra, pairs: dict[str, list[DiagTerm]]) -> None:
        if algebra.grading != GRADING_HOMOLOGICAL:
            raise ValueError("cell coalgebras require homological grading")
        self.algebra = algebra
        self.pairs = {g: list(pairs.get(g, [])) for g in algebra.generators}

    def cell_degree(self, name: str) -> int:
        return self.algebra.gen_degree(name) + 1

    def reduced_diagonal(self, name: str) -> list[DiagTerm]:
        return self.pairs.get(name, [])

    def problems(self) -> list[str]:
        """Degree mismatches and failures of the coderivation condition."""
        out: list[str] = []
        lin = {
            g: self.algebra.linear_part(self.algebra.diff[g])
            for g in self.algebra.generators
        }
        for name in sorted(self.pairs):
            for term in self.pairs[name]:
                if self.cell_degree(term.left) + self.cell_degree(term.right) != self.cell_degree(name):
                    out.append(
                        f"diag {name}: cell degrees of {term.left} ⊗ {term.right} do not add up"
                    )
        for name in sorted(self.pairs):
            # Both sides of Δ̄(∂c) = (∂⊗1 + 1⊗∂)(Δ̄c) as pair dictionaries.
            lhs: dict[tuple[str, str], Fraction] = {}
            for target, coeff in lin[name].items():
                for term in self.pairs.get(target, []):
                    key = (term.left, term.right)
                    lhs[key] = lhs.get(key, Fraction(0)) + coeff * term.coeff
            rhs: dict[tuple[str, str], Fraction] = {}
            for term in self.pairs[name]:
                for target, coeff in lin[term.left].items():
                    key = (target, term.right)
                    rhs[key] = rhs.get(key, Fraction(0)) + term.coeff * coeff
                sign = -1 if self.cell_degree(term.left) % 2 else 1
                for target, coeff in lin[term.right].items():
                    key = (term.left, target)
                    rhs[key] = rhs.get(key, Fraction(0)) + sign * term.coeff * coeff
            lhs = {k: v for k, v in lhs.items() if v}
            rhs = {k: v for k, v in rhs.items() if v}
            if lhs != rhs:
                out.append(f"diag {name}: not a coderivation against the cellular differential")
        return out


def convolution_values(
    algebra: FreeDgAlgebra,
    coalgebra: CellCoalgebra,
    f: Values,
    p_f: int,
    g: Values,
    p_g: int,
) -> Values:
    """Convolution of two cell functionals along the reduced diagonal.

    (f ∗ g)(c) = (−1)^{p_f+p_g} Σ_{c' ⊗ c''} (−1)^{p_g·|c'|} f(c')·g(c'')
    with |c'| the cell degree; the result has degree p_f + p_g + 1.  The
    global twist makes the first-page differential a derivation of ∗:
    ∂(f ∗ g) = ∂f ∗ g + (−1)^{p_f} f ∗ ∂g.
    """
    tau = Fraction(-1 if (p_f + p_g) % 2 else 1)
    out: Values = {}
    for name in algebra.generators:
        total: Element = {}
        for term in coalgebra.reduced_diagonal(name):
            left = f.get(term.left)
            right = g.get(term.right)
            if not left or not right:
                continue
            sign = -1 if (p_g * coalgebra.cell_degree(term.left)) % 2 else 1
            product = algebra.mul(left, right)
            for mono, c in product.items():
                el_add_term(total, mono, tau * sign * term.coeff * c)
        if total:
            out[name] = total
    return out


@dataclass
class MultiplicativityReport:
    """Derivation property of the first-page differential for convolution."""

    pairs_checked: int
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def multiplicativity_check(
    algebra: FreeDgAlgebra,
    coalgebra: CellCoalgebra,
    window: int,
) -> MultiplicativityReport:
    """Check ∂(f∗g) = ∂f∗g + (−1)^{p_f} f∗∂g on all generator functionals.

    Runs over the trivial-coefficient derivation classes (v ↦ 1) with
    degrees p = deg(v) up to the window; these span the nonzero first-page
    row of the trivial-coefficient tower.
    """
    der = DerComplex(algebra, Coefficients.trivial(algebra))
    names = [
        g for g in sorted(algebra.generators) if algebra.gen_degree(g) <= window
    ]
    failures: list[str] = []
    checked = 0
    one = Fraction(1)
    for a in names:
        for b in names:
            p_f, p_g = algebra.gen_degree(a), algebra.gen_degree(b)
            f: Values = {a: {(): one}}
            g: Values = {b: {(): one}}
            checked += 1
            product = convolution_values(algebra, coalgebra, f, p_f, g, p_g)
            lhs = der.differential_values(product, p_f + p_g + 1)
            df = der.differential_values(f, p_f)
            dg = der.differential_values(g, p_g)
            rhs = convolution_values(algebra, coalgebra, df, p_f + 1, g, p_g)
            second = convolution_values(algebra, coalgebra, f, p_f, dg, p_g + 1)
            scale = Fraction(-1 if p_f % 2 else 1)
            for name, el in second.items():
                rhs[name] = el_add(rhs.get(name, {}), el, scale)
            rhs = {k: v for k, v in rhs.items() if v}
            lhs = {k: v for k, v in lhs.items() if v}
            if lhs != rhs:
                failures.append(f"({a} -> 1) * ({b} -> 1)")
    return MultiplicativityReport(checked, failures)


# ---------------------------------------------------------------- validation


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class ValidationReport:
    model: str
    family: str
    checks: list[CheckResult]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def lines(self) -> list[str]:
        out = [f"model {self.model or '(unnamed)'} [{self.family}]"]
        for c in self.checks:
            status = "ok" if c.ok else "FAIL"
            detail = f" ({c.detail})" if c.detail else ""
            out.append(f"  {status:4} {c.name}{detail}")
        out.append("valid" if self.ok else "INVALID")
        return out


def validate_model(mf: ModelFile, window: int = 12) -> ValidationReport:
    """All structural checks: degrees, d² = 0, stages, family conditions."""
    family = model_family(mf)
    checks: list[CheckResult] = []
    try:
        algebra = mf.build()
    except ValueError as exc:
        checks.append(CheckResult("differential degrees", False, str(exc)))
        return ValidationReport(mf.name, family, checks)
    checks.append(CheckResult("differential degrees", True))

    bad_squares = algebra.d_squared_failures_on_generators()
    checks.append(
        CheckResult(
            "d squared is zero on generators",
            not bad_squares,
            ", ".join(bad_squares),
        )
    )

    base = mf.base_names()
    stage_bad = algebra.stage_condition_failures(exempt=base)
    checks.append(
        CheckResult(
            "stage condition (d lands below the stage)",
            not stage_bad,
            ", ".join(stage_bad),
        )
    )

    if base:
        closure_bad = []
        for name in sorted(base):
            for mono in algebra.diff[name]:
                if any(letter not in base for letter in mono):
                    closure_bad.append(name)
                    break
        checks.append(
            CheckResult(
                "base subalgebra closed under d",
                not closure_bad,
                ", ".join(closure_bad),
            )
        )
        checks.append(
            CheckResult(
                "base flags require a sullivan model",
                family == "sullivan",
                f"family is {family}",
            )
        )

    if family == "cellular":
        degrees_ok = all(g.degree >= 1 for g in mf.generators)
        checks.append(CheckResult("cell degrees at least one", degrees_ok))
        if degrees_ok:
            quillen = algebra.indecomposables_complex()
            cells_ok = True
            detail = ""
            for n in range(1, window + 1):
                expected = _cellular_homology_dim(algebra, n)
                got = quillen.homology(-n).dim
                if expected != got:
                    cells_ok = False
                    detail = f"cell dimension {n + 1}: {got} != {expected}"
                    break
            checks.append(
                CheckResult("linear part matches the cellular chain complex", cells_ok, detail)
            )
            try:
                tilde_extension(algebra)
                checks.append(CheckResult("square-tracking extension squares to zero", True))
            except ValueError as exc:
                checks.append(
                    CheckResult("square-tracking extension squares to zero", False, str(exc))
                )

    if mf.diagonals:
        if mf.grading != GRADING_HOMOLOGICAL or mf.flavor != "associative":
            checks.append(
                CheckResult(
                    "diagonal data requires a cellular model",
                    False,
                    f"family is {family}",
                )
            )
        else:
            problems = CellCoalgebra(algebra, mf.diagonals).problems()
            checks.append(
                CheckResult(
                    "diagonal is a coderivation on cells",
                    not problems,
                    "; ".join(problems),
                )
            )
    return ValidationReport(mf.name, family, checks)


def _cellular_homology_dim(algebra: FreeDgAlgebra, degree: int) -> int:
    """Homology of the generator span under the linear part of d.

    Computed densely and independently of the indecomposables complex: rank
    arithmetic over explicit matrices between generator lists.
    """
    gens_by_degree: dict[int, list[str]] = {}
    for g in sorted(algebra.generators):
        gens_by_degree.setdefault(algebra.gen_degree(g), []).append(g)

    def boundary(from_degree: int) -> Matrix:
        src = gens_by_degree.get(from_degree, [])
        tgt = gens_by_degree.get(from_degree - 1, [])
        index = {g: j for j, g in enumerate(tgt)}
        m = Matrix(len(src), len(tgt))
        for i, g in enumerate(src):
            for w, c in algebra.linear_part(algebra.diff[g]).items():
                if w in index:
                    m.add_to(i, index[w], c)
        return m

    dim = len(gens_by_degree.get(degree, []))
    d_out = boundary(degree)
    d_in = boundary(degree + 1)
    return dim - d_out.rank() - d_in.rank()


# ------------------------------------------------------------- loop report


@dataclass
class LoopHomologyReport:
    """Free-loop-space homology of a cellular model via the adjoint cone."""

    model: str
    window: int
    betti: dict[int, int]
    cone_homology: dict[int, int]
    assembly: dict[int, tuple[int, int, bool]]
    pages: dict[int, dict[tuple[int, int], int]]
    e2_engine: dict[tuple[int, int], int]
    e2_expected: dict[tuple[int, int], int]
    e2_matches: bool
    stable_page: int

    @property
    def ok(self) -> bool:
        return all(ok for (_, _, ok) in self.assembly.values())


def algebra_homology_dims(algebra: FreeDgAlgebra, degrees: Sequence[int]) -> dict[int, int]:
    """Homology of the underlying complex, keyed by native degree."""
    cx = algebra.algebra_complex()
    out = {}
    for n in degrees:
        cdeg = -n if algebra.grading == GRADING_HOMOLOGICAL else n
        out[n] = cx.homology(cdeg).dim
    return out


def quillen_dims(algebra: FreeDgAlgebra, degrees: Sequence[int]) -> dict[int, int]:
    """Homology of the indecomposables, keyed by native degree."""
    cx = algebra.indecomposables_complex()
    out = {}
    for n in degrees:
        cdeg = -n if algebra.grading == GRADING_HOMOLOGICAL else n
        out[n] = cx.homology(cdeg).dim
    return out


def loop_homology(
    mf: ModelFile, window: int = 10, pages: Sequence[int] = ()
) -> LoopHomologyReport:
    """Loop-space homology report for a cellular model.

    Classes of the adjoint-cone spectral sequence at filtration s and
    internal total degree n are reported in loop degree m = 2s − n: a
    derivation slot (v ↦ w) then sits at (s, t) = (deg v + 1, deg w), the
    bidegrees of maps from degree-s cells into the degree-t loop homology,
    and the algebra column s = 0 supplies the cell-free summand.
    """
    if model_family(mf) != "cellular":
        raise ValueError("loop homology requires an associative homological model")
    algebra = mf.algebra()
    cone = ConeComplex(algebra)
    fc = cone_tower(cone)
    ss = SpectralSequence(fc)
    r_stable = ss.stable_page

    needed_n = sorted(
        {2 * s - m for s in range(0, fc.max_level + 1) for m in range(0, window + 1)}
    )
    betti: dict[int, int] = {m: 0 for m in range(0, window + 1)}
    for s in range(0, fc.max_level + 1):
        for m in range(0, window + 1):
            betti[m] += ss.entry(r_stable, s, 2 * s - m).dim

    cone_h = {n: cone.complex().homology(n).dim for n in needed_n}
    assembly = ss.total_degree_check(needed_n)

    page_tables: dict[int, dict[tuple[int, int], int]] = {}
    for r in pages:
        internal = ss.page_dims(r, needed_n)
        page_tables[r] = {
            (s, -t): dim
            for (s, t), dim in internal.items()
            if 0 <= -t <= window
        }

    h_cells = {0: 1}
    q_dims = quillen_dims(algebra, list(range(1, fc.max_level + 1)))
    for s in range(1, fc.max_level + 1):
        h_cells[s] = q_dims.get(s - 1, 0)
    h_loops = algebra_homology_dims(algebra, list(range(0, window + 1)))
    e2_expected = {}
    for s in range(0, fc.max_level + 1):
        for t in range(0, window + 1):
            dim = h_cells.get(s, 0) * h_loops.get(t, 0)
            if dim:
                e2_expected[(s, t)] = dim
    internal_e2 = ss.page_dims(2, needed_n)
    e2_engine = {
        (s, -t): dim
        for (s, t), dim in internal_e2.items()
        if 0 <= -t <= window
    }
    return LoopHomologyReport(
        model=mf.name,
        window=window,
        betti=betti,
        cone_homology=cone_h,
        assembly=assembly,
        pages=page_tables,
        e2_engine=e2_engine,
        e2_expected=e2_expected,
        e2_matches=e2_engine == e2_expected,
        stable_page=r_stable,
    )


# -------------------------------------------------------------- aut report


@dataclass
class BracketEntry:
    """One Lie bracket of homotopy classes: [a_i, b_j] in class coordinates."""

    degree_a: int
    index_a: int
    degree_b: int
    index_b: int
    degree_result: int
    coords: list[str]
    text: str


@dataclass
class AutHomotopyReport:
    """Rational homotopy of the identity component of fiberwise self-maps."""

    model: str
    window: int
    dims: dict[int, int]
    degree_zero_dim: int
    pages_internal: dict[int, dict[tuple[int, int], int]]
    pages_relabeled: dict[int, dict[tuple[int, int], int]]
    pages_flipped: dict[int, dict[tuple[int, int], int]]
    hom_shaped: dict[tuple[int, int], int]
    assembly: dict[int, tuple[int, int, bool]]
    brackets: list[BracketEntry]
    stable_page: int

    @property
    def ok(self) -> bool:
        return all(ok for (_, _, ok) in self.assembly.values())


def fiber_homotopy_dims(mf: ModelFile, window: int) -> dict[int, int]:
    """Linear-part homology of the fiber generators, keyed by degree."""
    algebra = mf.algebra()
    base = mf.base_names()
    fiber = [g.name for g in mf.generators if g.role != "base"]
    by_degree: dict[int, list[str]] = {}
    for g in sorted(fiber):
        by_degree.setdefault(algebra.gen_degree(g), []).append(g)

    def linear_matrix(degree: int) -> Matrix:
        src = by_degree.get(degree, [])
        tgt = by_degree.get(degree + 1, [])
        index = {g: j for j, g in enumerate(tgt)}
        m = Matrix(len(src), len(tgt))
        for i, g in enumerate(src):
            for w, c in algebra.linear_part(algebra.diff[g]).items():
                if w in index and w not in base:
                    m.add_to(i, index[w], c)
        return m

    out = {}
    for n in range(1, window + 1):
        dim = len(by_degree.get(n, []))
        out[n] = dim - linear_matrix(n).rank() - linear_matrix(n - 1).rank()
    return {n: d for n, d in out.items() if d}


def aut_homotopy(
    mf: ModelFile, window: int = 10, pages: Sequence[int] = ()
) -> AutHomotopyReport:
    """Dimensions of H^{-n} of the base-fixing derivations, with pages.

    Degree n ≥ 1 of the table is the rational homotopy in degree n.  Pages
    come in three labelings: internal (s = stage, t = total − s, d_r of
    bidegree (r, 1−r)), relabeled (σ, τ) = (s, 2s + t) matching maps from
    degree-σ fiber classes into degree-τ cohomology (d_r moves (r, r+1),
    class degree n = σ − τ), and flipped (s, −t) (d_r moves (r, r−1)).
    """
    if model_family(mf) != "sullivan":
        raise ValueError(
            "self-equivalence homotopy requires a commutative cohomological model"
        )
    algebra = mf.algebra()
    base = mf.base_names()
    if len(base) == len(mf.generators):
        der = None  # no fiber generators: the relative complex is zero
    else:
        der = DerComplex(algebra, vanishing=base)

    dims = {n: 0 for n in range(1, window + 1)}
    degree_zero = 0
    assembly: dict[int, tuple[int, int, bool]] = {}
    pages_internal: dict[int, dict[tuple[int, int], int]] = {r: {} for r in pages}
    pages_relabeled: dict[int, dict[tuple[int, int], int]] = {r: {} for r in pages}
    pages_flipped: dict[int, dict[tuple[int, int], int]] = {r: {} for r in pages}
    brackets: list[BracketEntry] = []
    stable = 0

    if der is not None:
        cx = der.complex()
        for n in range(1, window + 1):
            dims[n] = cx.homology(-n).dim
        degree_zero = cx.homology(0).dim
        fc = der_tower(der)
        ss = SpectralSequence(fc)
        stable = ss.stable_page
        degrees = list(range(-window, 1))
        assembly = ss.total_degree_check(degrees)
        for r in pages:
            internal = ss.page_dims(r, degrees)
            pages_internal[r] = dict(sorted(internal.items()))
            pages_relabeled[r] = {
                (s, 2 * s + t): dim for (s, t), dim in sorted(internal.items())
            }
            pages_flipped[r] = {
                (s, -t): dim for (s, t), dim in sorted(internal.items())
            }
        brackets = _bracket_table(der, window)

    pi_f = fiber_homotopy_dims(mf, window)
    h_total = algebra_homology_dims(algebra, list(range(0, window + 1)))
    hom_shaped = {}
    for s, pi_dim in sorted(pi_f.items()):
        for t in range(0, window + 1):
            dim = pi_dim * h_total.get(t, 0)
            if dim:
                hom_shaped[(s, t)] = dim

    return AutHomotopyReport(
        model=mf.name,
        window=window,
        dims=dims,
        degree_zero_dim=degree_zero,
        pages_internal=pages_internal,
        pages_relabeled=pages_relabeled,
        pages_flipped=pages_flipped,
        hom_shaped=hom_shaped,
        assembly=assembly,
        brackets=brackets,
        stable_page=stable,
    )


def _bracket_table(der: DerComplex, window: int) -> list[BracketEntry]:
    """Lie brackets of cohomology representatives, reduced to class coordinates."""
    cx = der.complex()
    entries: list[BracketEntry] = []
    degrees = [n for n in range(1, window + 1) if cx.homology(-n).dim]
    for n_a in degrees:
        h_a = cx.homology(-n_a)
        for n_b in degrees:
            if n_b < n_a or n_a + n_b > window:
                continue
            h_b = cx.homology(-n_b)
            h_out = cx.homology(-(n_a + n_b))
            for i, rep_a in enumerate(h_a.representatives):
                values_a = der.values_of_vector(rep_a, -n_a)
                for j, rep_b in enumerate(h_b.representatives):
                    if n_b == n_a and j < i:
                        continue
                    values_b = der.values_of_vector(rep_b, -n_b)
                    bracket = der.lie_bracket(values_a, -n_a, values_b, -n_b)
                    vec = der.vector_of_values(bracket, -(n_a + n_b))
                    coords = h_out.reduce(vec)
                    coord_list = [
                        str(coords.get(k, Fraction(0))) for k in range(h_out.dim)
                    ]
                    nonzero = any(c != "0" for c in coord_list)
                    text = (
                        f"[e({n_a},{i}), e({n_b},{j})] = "
                        + (
                            " + ".join(
                                f"{coords[k]}*e({n_a + n_b},{k})"
                                for k in sorted(coords)
                            )
                            if nonzero
                            else "0"
                        )
                    )
                    entries.append(
                        BracketEntry(n_a, i, n_b, j, n_a + n_b, coord_list, text)
                    )
    return entries


# ----------------------------------------------------- generic ss reporting


@dataclass
class TowerReport:
    """Spectral-sequence run of a derivation tower for one coefficient choice."""

    model: str
    coefficients: str
    window: int
    pages_internal: dict[int, dict[tuple[int, int], int]]
    pages_flipped: dict[int, dict[tuple[int, int], int]]
    pages_relabeled: dict[int, dict[tuple[int, int], int]]
    einf: dict[tuple[int, int], int]
    assembly: dict[int, tuple[int, int, bool]]
    stable_page: int
    collapse: object | None = None

    @property
    def ok(self) -> bool:
        return all(ok for (_, _, ok) in self.assembly.values())


def derivation_tower(
    mf: ModelFile, coefficients: str = "self", target: ModelFile | None = None
) -> tuple[DerComplex, FilteredComplex]:
    """Derivation complex of the model with the requested coefficients.

    ``coefficients`` is "self", "trivial" or "target" (with ``target`` a
    second model whose same-named generators receive the generators of this
    one).  Base-flagged generators are held fixed.
    """
    algebra = mf.algebra()
    base = mf.base_names()
    if coefficients == "self":
        coeffs = Coefficients.identity(algebra)
    elif coefficients == "trivial":
        coeffs = Coefficients.trivial(algebra)
    elif coefficients == "target":
        if target is None:
            raise ValueError("target coefficients need a target model")
        coeffs = Coefficients.from_target(algebra, target.algebra())
    else:
        raise ValueError(f"unknown coefficient choice {coefficients!r}")
    der = DerComplex(algebra, coeffs, vanishing=base)
    return der, der_tower(der)


def tower_report(
    mf: ModelFile,
    coefficients: str = "self",
    target: ModelFile | None = None,
    window: int = 10,
    pages: Sequence[int] = (1, 2, 3, 4, 5, 6),
    check_collapse: bool = False,
) -> TowerReport:
    der, fc = derivation_tower(mf, coefficients, target)
    ss = SpectralSequence(fc)
    degrees = list(range(-window, window + 1))
    pages_internal = {r: dict(sorted(ss.page_dims(r, degrees).items())) for r in pages}
    pages_flipped = {
        r: {(s, -t): dim for (s, t), dim in table.items()}
        for r, table in pages_internal.items()
    }
    pages_relabeled = {
        r: {(s, 2 * s + t): dim for (s, t), dim in table.items()}
        for r, table in pages_internal.items()
    }
    einf = dict(sorted(ss.einf_dims(degrees).items()))
    assembly = ss.total_degree_check(degrees)
    collapse = collapse_report(ss, degrees) if check_collapse else None
    return TowerReport(
        model=mf.name,
        coefficients=coefficients,
        window=window,
        pages_internal=pages_internal,
        pages_flipped=pages_flipped,
        pages_relabeled=pages_relabeled,
        einf=einf,
        assembly=assembly,
        stable_page=ss.stable_page,
        collapse=collapse,
    )
