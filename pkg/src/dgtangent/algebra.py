"""Quasi-free differential graded algebras over the rationals.

Two kinds of free algebra are supported:

- ``tensor``: the free associative algebra on graded generators (words);
- ``commutative``: the free graded-commutative algebra (exterior on odd
  generators, polynomial on even ones).

Monomials are tuples of generator names.  Commutative monomials are kept
sorted by the generator ordering (degree, then name); sorting introduces the
Koszul sign, and a repeated odd letter collapses the monomial to zero.
Elements are sparse dicts mapping monomials to nonzero rationals.

Gradings: an algebra is stored with its native grading (``homological`` or
``cohomological``) and all degree arithmetic below uses native degrees.  The
internal cohomological degree (used by complexes and spectral sequences) is
the negation for homologically graded algebras; parities are unaffected, so
every Koszul sign can be read off native degrees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .complexes import CochainComplex, to_cohomological
from .linalg import Matrix, Vector

Monomial = tuple[str, ...]
Element = dict[Monomial, Fraction]

KIND_TENSOR = "tensor"
KIND_COMMUTATIVE = "commutative"

UNIT: Monomial = ()


def el_add(a: Element, b: Element, coeff: Fraction = Fraction(1)) -> Element:
    """Return a + coeff*b."""
    out = dict(a)
    for mono, val in b.items():
        new = out.get(mono, Fraction(0)) + coeff * val
        if new == 0:
            out.pop(mono, None)
        else:
            out[mono] = new
    return out


def el_scale(a: Element, coeff: Fraction) -> Element:
    if coeff == 0:
        return {}
    return {mono: coeff * val for mono, val in a.items()}


def el_add_term(acc: Element, mono: Monomial, coeff: Fraction) -> None:
    """In-place accumulate coeff on a monomial, dropping zeros."""
    new = acc.get(mono, Fraction(0)) + coeff
    if new == 0:
        acc.pop(mono, None)
    else:
        acc[mono] = new


@dataclass(frozen=True)
class Generator:
    """A free algebra generator: name, native degree, tower stage, role.

    ``stage`` indexes the tower of subalgebras (defaults to the degree);
    ``role`` is ``""``, ``"base"`` or ``"fiber"`` for relative models.
    """

    name: str
    degree: int
    stage: int | None = None
    role: str = ""

    def resolved_stage(self) -> int:
        return self.degree if self.stage is None else self.stage


class FreeDgAlgebra:
    """A free graded algebra with a quasi-free differential."""

    def __init__(
        self,
        kind: str,
        grading: str,
        generators: Sequence[Generator],
        name: str = "",
        allow_nonpositive: bool = False,
    ) -> None:
        if kind not in (KIND_TENSOR, KIND_COMMUTATIVE):
            raise ValueError(f"unknown algebra kind {kind!r}")
        self.kind = kind
        self.grading = grading
        self.name = name
        self.allow_nonpositive = allow_nonpositive
        self.generators: dict[str, Generator] = {}
        for gen in generators:
            if gen.name in self.generators:
                raise ValueError(f"duplicate generator name {gen.name!r}")
            if gen.degree <= 0 and not allow_nonpositive:
                raise ValueError(
                    f"generator {gen.name!r} has nonpositive degree {gen.degree}"
                )
            self.generators[gen.name] = gen
        # Letters sort by (degree, name); monomials by (length, letter keys).
        self._letter_key = {g.name: (g.degree, g.name) for g in self.generators.values()}
        self.diff: dict[str, Element] = {g: {} for g in self.generators}
        self.warnings: list[str] = []
        for gen in self.generators.values():
            if gen.degree == 1 and grading == "cohomological":
                self.warnings.append(
                    f"generator {gen.name!r} has degree 1; "
                    "model is not simply connected"
                )

    # ---------------------------------------------------------------- degrees

    def gen_degree(self, name: str) -> int:
        return self.generators[name].degree

    def gen_cdeg(self, name: str) -> int:
        return to_cohomological(self.generators[name].degree, self.grading)

    def gen_parity(self, name: str) -> int:
        return self.generators[name].degree % 2

    def gen_stage(self, name: str) -> int:
        return self.generators[name].resolved_stage()

    def monomial_degree(self, mono: Monomial) -> int:
        return sum(self.generators[l].degree for l in mono)

    def monomial_cdeg(self, mono: Monomial) -> int:
        return to_cohomological(self.monomial_degree(mono), self.grading)

    def monomial_parity(self, mono: Monomial) -> int:
        return self.monomial_degree(mono) % 2

    def element_degree(self, el: Element) -> int | None:
        """Native degree of a homogeneous element (None for 0; error if mixed)."""
        degrees = {self.monomial_degree(m) for m in el}
        if not degrees:
            return None
        if len(degrees) > 1:
            raise ValueError(f"element is not homogeneous: degrees {sorted(degrees)}")
        return degrees.pop()

    def monomial_key(self, mono: Monomial) -> tuple:
        return (len(mono), tuple(self._letter_key[l] for l in mono))

    def sorted_monomials(self, monos: Iterable[Monomial]) -> list[Monomial]:
        return sorted(monos, key=self.monomial_key)

    # ------------------------------------------------------------ arithmetic

    def one(self) -> Element:
        return {UNIT: Fraction(1)}

    def gen_element(self, name: str) -> Element:
        if name not in self.generators:
            raise KeyError(f"unknown generator {name!r}")
        return {(name,): Fraction(1)}

    def normalize_monomial(self, letters: Monomial) -> tuple[Fraction, Monomial | None]:
        """Canonical form of a raw word: (sign, monomial) or (0, None)."""
        for letter in letters:
            if letter not in self.generators:
                raise KeyError(f"unknown generator {letter!r} in monomial")
        if self.kind == KIND_TENSOR:
            return Fraction(1), letters
        # Commutative: insertion sort, tracking Koszul swaps of odd letters.
        arr = list(letters)
        key = self._letter_key
        parity = {name: gen.degree % 2 for name, gen in self.generators.items()}
        sign = Fraction(1)
        for i in range(1, len(arr)):
            j = i
            while j > 0 and key[arr[j]] < key[arr[j - 1]]:
                if parity[arr[j]] and parity[arr[j - 1]]:
                    sign = -sign
                arr[j], arr[j - 1] = arr[j - 1], arr[j]
                j -= 1
        for a, b in zip(arr, arr[1:]):
            if a == b and parity[a]:
                return Fraction(0), None
        return sign, tuple(arr)

    def mul(self, a: Element, b: Element) -> Element:
        out: Element = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                sign, mono = self.normalize_monomial(m1 + m2)
                if mono is not None:
                    el_add_term(out, mono, sign * c1 * c2)
        return out

    def product(self, *factors: Element) -> Element:
        acc = self.one()
        for f in factors:
            acc = self.mul(acc, f)
        return acc

    def power(self, el: Element, n: int) -> Element:
        acc = self.one()
        for _ in range(n):
            acc = self.mul(acc, el)
        return acc

    def commutator(self, a: Element, b: Element) -> Element:
        """[a,b] = ab − (−1)^{|a||b|} ba for homogeneous a, b."""
        pa = (self.element_degree(a) or 0) % 2
        pb = (self.element_degree(b) or 0) % 2
        sign = Fraction(-1) if pa and pb else Fraction(1)
        return el_add(self.mul(a, b), self.mul(b, a), -sign)

    # ---------------------------------------------------------- differential

    def set_differential(self, name: str, value: Element) -> None:
        if name not in self.generators:
            raise KeyError(f"unknown generator {name!r}")
        value = {m: c for m, c in value.items() if c != 0}
        if value:
            expected = self.gen_degree(name) + (
                1 if self.grading == "cohomological" else -1
            )
            actual = self.element_degree(value)
            if actual != expected:
                raise ValueError(
                    f"d({name}) has native degree {actual}, expected {expected}"
                )
        self.diff[name] = value

    def differential(self, el: Element) -> Element:
        """Extend d over words by the (untwisted) graded Leibniz rule."""
        out: Element = {}
        for mono, coeff in el.items():
            sign = Fraction(1)
            for i, letter in enumerate(mono):
                dv = self.diff.get(letter, {})
                if dv:
                    left, right = mono[:i], mono[i + 1 :]
                    for dm, dc in dv.items():
                        s2, nm = self.normalize_monomial(left + dm + right)
                        if nm is not None:
                            el_add_term(out, nm, sign * s2 * coeff * dc)
                if self.gen_parity(letter):
                    sign = -sign
        return out

    def d_squared_failures_on_generators(self) -> list[str]:
        bad = []
        for name in sorted(self.generators):
            if self.differential(self.differential(self.gen_element(name))):
                bad.append(name)
        return bad

    def linear_part(self, el: Element) -> dict[str, Fraction]:
        """Coefficients of the word-length-one part of an element."""
        return {mono[0]: c for mono, c in el.items() if len(mono) == 1}

    # -------------------------------------------------- derivation extension

    def apply_derivation(
        self,
        values: dict[str, Element],
        op_parity: int,
        el: Element,
        target: "FreeDgAlgebra",
        u_images: dict[str, Element],
    ) -> Element:
        """Apply the u-twisted derivation with the given slot values to el.

        The extension rule over a word x_1…x_k is
        Σ_i (−1)^{p(|x_1|+…+|x_{i−1}|)} u(x_1)…u(x_{i−1})·F(x_i)·u(x_{i+1})…u(x_k),
        with the products taken in the target algebra.
        """
        out: Element = {}
        for mono, coeff in el.items():
            k = len(mono)
            hit = [i for i in range(k) if values.get(mono[i])]
            if not hit:
                continue
            # Prefix products u(x_1)…u(x_{i-1}) and suffix products.
            prefix: list[Element] = [target.one()]
            for letter in mono[:-1]:
                prefix.append(target.mul(prefix[-1], u_images[letter]))
            suffix: list[Element] = [target.one()] * (k + 1)
            for i in range(k - 1, -1, -1):
                suffix[i] = target.mul(u_images[mono[i]], suffix[i + 1])
            sign = Fraction(1)
            pos = 0
            for i in hit:
                while pos < i:
                    if op_parity and self.gen_parity(mono[pos]):
                        sign = -sign
                    pos += 1
                term = target.mul(target.mul(prefix[i], values[mono[i]]), suffix[i + 1])
                for tm, tc in term.items():
                    el_add_term(out, tm, sign * coeff * tc)
        return out

    # ------------------------------------------------------------ towers

    def stages(self) -> list[int]:
        """Sorted distinct stages occurring among the generators."""
        return sorted({self.gen_stage(g) for g in self.generators})

    def generators_of_stage(self, stage: int) -> list[str]:
        return sorted(
            (g for g in self.generators if self.gen_stage(g) == stage),
            key=lambda g: self._letter_key[g],
        )

    def stage_condition_failures(self, exempt: frozenset[str] = frozenset()) -> list[str]:
        """Generators whose differential uses letters of stage >= their own.

        Letters in ``exempt`` (and exempt generators themselves) are allowed
        anywhere; relative models pass their base generators here.
        """
        bad = []
        for name in sorted(self.generators):
            if name in exempt:
                continue
            s = self.gen_stage(name)
            for mono in self.diff[name]:
                if any(
                    l not in exempt and self.gen_stage(l) >= s for l in mono
                ):
                    bad.append(name)
                    break
        return bad

    def monomial_in_stages_below(self, mono: Monomial, stage: int) -> bool:
        return all(self.gen_stage(l) < stage for l in mono)

    # ------------------------------------------------------------ bases

    def basis_in_degree(self, degree: int) -> list[Monomial]:
        """All monomials of the given native degree, in canonical order."""
        if any(g.degree <= 0 for g in self.generators.values()):
            raise ValueError(
                "basis enumeration requires strictly positive generator degrees"
            )
        if degree < 0:
            return []
        if degree == 0:
            return [UNIT]
        letters = sorted(self.generators, key=lambda g: self._letter_key[g])
        found: list[Monomial] = []
        if self.kind == KIND_TENSOR:
            def walk(prefix: list[str], remaining: int) -> None:
                if remaining == 0:
                    found.append(tuple(prefix))
                    return
                for letter in letters:
                    d = self.gen_degree(letter)
                    if d <= remaining:
                        prefix.append(letter)
                        walk(prefix, remaining - d)
                        prefix.pop()

            walk([], degree)
        else:
            def walk_c(idx: int, prefix: list[str], remaining: int) -> None:
                if remaining == 0:
                    found.append(tuple(prefix))
                    return
                if idx >= len(letters):
                    return
                letter = letters[idx]
                d = self.gen_degree(letter)
                max_mult = 1 if d % 2 else remaining // d
                for mult in range(0, max_mult + 1):
                    if mult * d > remaining:
                        break
                    walk_c(idx + 1, prefix + [letter] * mult, remaining - mult * d)

            walk_c(0, [], degree)
        return self.sorted_monomials(found)

    def basis_in_cdeg(self, cdeg: int) -> list[Monomial]:
        return self.basis_in_degree(to_cohomological(cdeg, self.grading))

    def element_to_vector(self, el: Element, basis: Sequence[Monomial]) -> Vector:
        index = {m: i for i, m in enumerate(basis)}
        out: Vector = {}
        for mono, coeff in el.items():
            if mono not in index:
                raise ValueError(f"monomial {mono} not in the given basis")
            out[index[mono]] = coeff
        return out

    def vector_to_element(self, vec: Vector, basis: Sequence[Monomial]) -> Element:
        return {basis[i]: c for i, c in vec.items() if c != 0}

    # ------------------------------------------------------------ complexes

    def algebra_complex(self) -> CochainComplex:
        """The underlying cochain complex (bases of monomials, matrix of d)."""

        def basis_fn(n: int) -> list[Monomial]:
            return self.basis_in_cdeg(n)

        def diff_fn(n: int) -> Matrix:
            src = self.basis_in_cdeg(n)
            tgt = self.basis_in_cdeg(n + 1)
            m = Matrix(len(src), len(tgt))
            index = {mono: j for j, mono in enumerate(tgt)}
            for i, mono in enumerate(src):
                for dm, dc in self.differential({mono: Fraction(1)}).items():
                    m.add_to(i, index[dm], dc)
            return m

        return CochainComplex(basis_fn, diff_fn, name=f"{self.name or 'algebra'}")

    def indecomposables_complex(self) -> CochainComplex:
        """Generators with the linear part of d (the chain complex of cells)."""

        def basis_fn(n: int) -> list[str]:
            return [
                g
                for g in sorted(self.generators, key=lambda g: self._letter_key[g])
                if self.gen_cdeg(g) == n
            ]

        def diff_fn(n: int) -> Matrix:
            src = basis_fn(n)
            tgt = basis_fn(n + 1)
            m = Matrix(len(src), len(tgt))
            index = {g: j for j, g in enumerate(tgt)}
            for i, g in enumerate(src):
                for w, c in self.linear_part(self.diff[g]).items():
                    if w in index:
                        m.add_to(i, index[w], c)
            return m

        return CochainComplex(basis_fn, diff_fn, name="indecomposables")

    def cdeg_range(self) -> tuple[int, int] | None:
        """Smallest and largest generator cohomological degrees, if any."""
        if not self.generators:
            return None
        cdegs = [self.gen_cdeg(g) for g in self.generators]
        return min(cdegs), max(cdegs)


def trivial_algebra(grading: str) -> FreeDgAlgebra:
    """The base field as a free algebra with no generators."""
    return FreeDgAlgebra(KIND_COMMUTATIVE, grading, [], name="k")


class AlgebraMorphism:
    """A dg algebra morphism given by generator images in the target."""

    def __init__(
        self,
        source: FreeDgAlgebra,
        target: FreeDgAlgebra,
        images: dict[str, Element],
        name: str = "",
    ) -> None:
        self.source = source
        self.target = target
        self.images = {g: dict(images.get(g, {})) for g in source.generators}
        self.name = name

    @classmethod
    def name_matching(
        cls, source: FreeDgAlgebra, target: FreeDgAlgebra, name: str = ""
    ) -> "AlgebraMorphism":
        """Send each generator to the same-named target generator (else 0)."""
        images: dict[str, Element] = {}
        for g, gen in source.generators.items():
            if g in target.generators and target.gen_degree(g) == gen.degree:
                images[g] = target.gen_element(g)
            else:
                images[g] = {}
        return cls(source, target, images, name=name)

    @classmethod
    def identity(cls, algebra: FreeDgAlgebra) -> "AlgebraMorphism":
        return cls(
            algebra,
            algebra,
            {g: algebra.gen_element(g) for g in algebra.generators},
            name="id",
        )

    @classmethod
    def augmentation(cls, source: FreeDgAlgebra, target: FreeDgAlgebra) -> "AlgebraMorphism":
        """Kill every generator (the unit map composed with the counit)."""
        return cls(source, target, {g: {} for g in source.generators}, name="aug")

    def apply(self, el: Element) -> Element:
        out: Element = {}
        for mono, coeff in el.items():
            term = self.target.one()
            for letter in mono:
                term = self.target.mul(term, self.images[letter])
                if not term:
                    break
            for tm, tc in term.items():
                el_add_term(out, tm, coeff * tc)
        return out

    def check(self) -> list[str]:
        """Degree preservation and the chain property on generators."""
        problems: list[str] = []
        for g in sorted(self.source.generators):
            img = self.images[g]
            if img:
                src_cdeg = self.source.gen_cdeg(g)
                try:
                    native = self.target.element_degree(img)
                except ValueError:
                    problems.append(f"image of {g!r} is not homogeneous")
                    continue
                tgt_cdeg = to_cohomological(native, self.target.grading)  # type: ignore[arg-type]
                if tgt_cdeg != src_cdeg:
                    problems.append(
                        f"image of {g!r} has degree {tgt_cdeg}, expected {src_cdeg}"
                    )
            lhs = self.apply(self.source.diff[g])
            rhs = self.target.differential(img)
            if el_add(lhs, rhs, Fraction(-1)):
                problems.append(f"morphism does not commute with d on {g!r}")
        return problems


def tilde_extension(algebra: FreeDgAlgebra, eps_name: str = "eps") -> FreeDgAlgebra:
    """Adjoin a square-tracking degree −1 generator ε with dε = ε².

    The result is the same tensor algebra with one extra homological
    degree −1 generator and the twisted differential d̄v = dv + [ε, v].
    Basis enumeration is unavailable on the result (negative degree);
    generator-level identities (d̄² = 0) are still verified symbolically.
    """
    if algebra.kind != KIND_TENSOR or algebra.grading != "homological":
        raise ValueError("the ε-extension needs a homological tensor algebra")
    if eps_name in algebra.generators:
        raise ValueError(f"generator name {eps_name!r} already taken")
    gens = list(algebra.generators.values()) + [Generator(eps_name, -1, stage=0)]
    out = FreeDgAlgebra(
        KIND_TENSOR,
        "homological",
        gens,
        name=f"{algebra.name or 'algebra'}~",
        allow_nonpositive=True,
    )
    eps = out.gen_element(eps_name)
    out.set_differential(eps_name, out.mul(eps, eps))
    for g in algebra.generators:
        base = {m: c for m, c in algebra.diff[g].items()}
        twisted = el_add(base, out.commutator(eps, out.gen_element(g)))
        out.set_differential(g, twisted)
    bad = out.d_squared_failures_on_generators()
    if bad:
        raise ValueError(f"ε-extension is not a complex: d̄² ≠ 0 on {bad}")
    return out


def format_element(el: Element) -> str:
    """Human-readable rendering, e.g. ``2*x*y - 1/2*q``; unit monomial is 1."""
    if not el:
        return "0"
    parts: list[str] = []
    for mono in sorted(el, key=lambda m: (len(m), m)):
        coeff = el[mono]
        word = "*".join(mono) if mono else "1"
        if coeff == 1 and mono:
            term = word
        elif coeff == -1 and mono:
            term = f"-{word}"
        elif mono:
            term = f"{coeff}*{word}"
        else:
            term = str(coeff)
        parts.append(term)
    text = " + ".join(parts)
    return text.replace("+ -", "- ")
