"""Derivation complexes of quasi-free dg algebras.

Given a quasi-free algebra A, a coefficient pair (U, u: A → U) and a set of
generators on which derivations must vanish, the complex Der(A, U) in degree
p has basis the single-slot derivations (v ↦ m): the u-twisted derivation
sending generator v to the U-monomial m (with cdeg(m) − cdeg(v) = p) and every
other generator to zero.  The differential is ∂F = d_U∘F − (−1)^{|F|} F∘d_A.

Also here: the Lie bracket of derivations, the two-slot insertion brace and
the cup product it induces, the restriction short exact sequences for stages
of the generator tower, and the mapping cone of the adjoint map q ↦ [q,−].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

from .algebra import (
    AlgebraMorphism,
    Element,
    FreeDgAlgebra,
    Monomial,
    el_add,
    el_add_term,
    el_scale,
    format_element,
    trivial_algebra,
)
from .complexes import CochainComplex
from .linalg import Matrix, Vector, spans_equal

Slot = tuple[str, Monomial]  # (generator name, coefficient monomial)
Values = dict[str, Element]  # derivation by its values on generators


class Coefficients:
    """A coefficient pair: an algebra U together with a morphism u: A → U."""

    def __init__(self, algebra: FreeDgAlgebra, morphism: AlgebraMorphism) -> None:
        if morphism.target is not algebra:
            raise ValueError("coefficient morphism must land in the coefficient algebra")
        self.algebra = algebra
        self.morphism = morphism

    @classmethod
    def identity(cls, algebra: FreeDgAlgebra) -> "Coefficients":
        return cls(algebra, AlgebraMorphism.identity(algebra))

    @classmethod
    def trivial(cls, algebra: FreeDgAlgebra) -> "Coefficients":
        """The base field, with every generator sent to zero."""
        k = trivial_algebra(algebra.grading)
        return cls(k, AlgebraMorphism.augmentation(algebra, k))

    @classmethod
    def from_target(cls, algebra: FreeDgAlgebra, target: FreeDgAlgebra) -> "Coefficients":
        """Name-matching morphism into an explicit target algebra."""
        return cls(target, AlgebraMorphism.name_matching(algebra, target))

    def check(self) -> list[str]:
        return self.morphism.check()


class DerComplex:
    """Der(A, U) relative to a vanishing set of generators."""

    def __init__(
        self,
        algebra: FreeDgAlgebra,
        coefficients: Coefficients | None = None,
        vanishing: frozenset[str] | set[str] = frozenset(),
        name: str = "",
    ) -> None:
        self.A = algebra
        self.coefficients = coefficients or Coefficients.identity(algebra)
        self.U = self.coefficients.algebra
        self.u = self.coefficients.morphism
        if self.u.source is not algebra:
            raise ValueError("coefficient morphism must start at the algebra")
        self.vanishing = frozenset(vanishing)
        unknown = self.vanishing - set(algebra.generators)
        if unknown:
            raise ValueError(f"vanishing set names unknown generators {sorted(unknown)}")
        # Derivations vanishing on a subalgebra only form a complex when the
        # subalgebra is closed under d.
        offenders = closure_offenders(algebra, self.vanishing)
        if offenders:
            raise ValueError(
                f"vanishing set is not closed under d (offenders: {offenders})"
            )
        self.slots = sorted(
            (g for g in algebra.generators if g not in self.vanishing),
            key=lambda g: (algebra.gen_degree(g), g),
        )
        self.name = name
        self._complex: CochainComplex | None = None

    # ------------------------------------------------------------- structure

    def basis(self, p: int) -> list[Slot]:
        out: list[Slot] = []
        for v in self.slots:
            for mono in self.U.basis_in_cdeg(p + self.A.gen_cdeg(v)):
                out.append((v, mono))
        return out

    def slot_stage(self, slot: Slot) -> int:
        return self.A.gen_stage(slot[0])

    def values_of_vector(self, vec: Vector, p: int) -> Values:
        basis = self.basis(p)
        out: Values = {}
        for idx, coeff in vec.items():
            v, mono = basis[idx]
            out.setdefault(v, {})
            el_add_term(out[v], mono, coeff)
        return {v: el for v, el in out.items() if el}

    def vector_of_values(self, values: Values, p: int) -> Vector:
        index = {slot: i for i, slot in enumerate(self.basis(p))}
        out: Vector = {}
        for v, el in values.items():
            for mono, coeff in el.items():
                key = (v, mono)
                if key not in index:
                    raise ValueError(
                        f"value {format_element({mono: coeff})} at slot {v!r} "
                        f"is not in the degree-{p} basis"
                    )
                out[index[key]] = coeff
        return out

    # ----------------------------------------------------------- operations

    def apply(self, values: Values, p: int, el: Element) -> Element:
        """Evaluate the degree-p derivation with the given values on el."""
        return self.A.apply_derivation(values, p % 2, el, self.U, self.u.images)

    def differential_values(self, values: Values, p: int) -> Values:
        """∂F = d_U∘F − (−1)^p F∘d_A, as values on the non-vanishing slots."""
        sign = Fraction(-1) if p % 2 else Fraction(1)
        out: Values = {}
        for w in self.slots:
            term = self.U.differential(values.get(w, {}))
            term = el_add(term, self.apply(values, p, self.A.diff[w]), -sign)
            if term:
                out[w] = term
        return out

    def is_cocycle(self, values: Values, p: int) -> bool:
        return not self.differential_values(values, p)

    # ------------------------------------------------------------- complexes

    def complex(self) -> CochainComplex:
        if self._complex is None:

            def basis_fn(p: int) -> list[Slot]:
                return self.basis(p)

            def diff_fn(p: int) -> Matrix:
                src = self.basis(p)
                tgt = self.basis(p + 1)
                index = {slot: j for j, slot in enumerate(tgt)}
                m = Matrix(len(src), len(tgt))
                for i, (v, mono) in enumerate(src):
                    image = self.differential_values({v: {mono: Fraction(1)}}, p)
                    for w, el in image.items():
                        for im_mono, coeff in el.items():
                            m.add_to(i, index[(w, im_mono)], coeff)
                return m

            self._complex = CochainComplex(basis_fn, diff_fn, name=self.name or "Der")
        return self._complex

    def cohomology_dims(self, degrees: Sequence[int]) -> dict[int, int]:
        cx = self.complex()
        return {p: cx.homology(p).dim for p in degrees}

    # -------------------------------------------------------------- brackets

    def lie_bracket(self, f: Values, p: int, g: Values, q: int) -> Values:
        """[F,G] = F∘G − (−1)^{pq} G∘F (identity coefficients only)."""
        if self.U is not self.A:
            raise ValueError("the Lie bracket needs coefficients in the algebra itself")
        sign = Fraction(-1) if (p % 2) and (q % 2) else Fraction(1)
        out: Values = {}
        for w in self.slots:
            term = self.apply(f, p, g.get(w, {}))
            term = el_add(term, self.apply(g, q, f.get(w, {})), -sign)
            if term:
                out[w] = term
        return out

    def format_slot(self, slot: Slot) -> str:
        v, mono = slot
        word = "*".join(mono) if mono else "1"
        return f"({v} -> {word})"

    def format_values(self, values: Values) -> str:
        parts = [
            f"({v} -> {format_element(values[v])})"
            for v in sorted(values)
            if values[v]
        ]
        return " , ".join(parts) if parts else "0"


def closure_offenders(algebra: FreeDgAlgebra, subset: frozenset[str]) -> list[str]:
    """Generators in the subset whose differential leaves the subset's span."""
    bad = []
    for g in sorted(subset):
        for mono in algebra.diff[g]:
            if any(letter not in subset for letter in mono):
                bad.append(g)
                break
    return bad


# --------------------------------------------------------------------- brace


def brace(
    der: DerComplex, f: Values, p: int, g: Values, q: int
) -> Values:
    """The two-slot insertion {d; f, g}, of degree p + q + 1.

    For each generator v and each word x_1…x_k of d(v), insert f at position
    i and g at position j > i with u applied everywhere else; the Koszul sign
    moves each operator past the (current) letters to its left.  The chain
    identity for this sign convention is
    ∂{d;f,g} = (−1)^q {d;∂f,g} + {d;f,∂g},
    so the induced product of cohomology classes is well defined.
    """
    A, U, u_images = der.A, der.U, der.u.images
    out: Values = {}
    for v in der.slots:
        acc: Element = {}
        for mono, c in A.diff[v].items():
            k = len(mono)
            parities = [A.gen_parity(letter) for letter in mono]
            for i in range(k):
                fi = f.get(mono[i])
                if not fi:
                    continue
                sign_i = (sum(parities[:i]) * p) % 2
                for j in range(i + 1, k):
                    gj = g.get(mono[j])
                    if not gj:
                        continue
                    # After the first insertion, position i carries parity |x_i|+p.
                    sign_j = ((sum(parities[:j]) + p) * q) % 2
                    sign = Fraction(-1) if (sign_i + sign_j) % 2 else Fraction(1)
                    term = U.one()
                    for l in range(i):
                        term = U.mul(term, u_images[mono[l]])
                    term = U.mul(term, fi)
                    for l in range(i + 1, j):
                        term = U.mul(term, u_images[mono[l]])
                    term = U.mul(term, gj)
                    for l in range(j + 1, k):
                        term = U.mul(term, u_images[mono[l]])
                    for tm, tc in term.items():
                        el_add_term(acc, tm, sign * c * tc)
        if acc:
            out[v] = acc
    return out


def cup_product(
    der: DerComplex, f: Values, p: int, g: Values, q: int, check: bool = True
) -> Values:
    """Cup product of derivation cocycles via the insertion brace."""
    if check:
        if not der.is_cocycle(f, p):
            raise ValueError("cup product: first factor is not a cocycle")
        if not der.is_cocycle(g, q):
            raise ValueError("cup product: second factor is not a cocycle")
    return brace(der, f, p, g, q)


# ----------------------------------------------------- restriction sequences


@dataclass
class RestrictionSequence:
    """Report on 0 → Der_{A_j}(A) → Der_{A_i}(A) → Der_{A_i}(A_j) → 0."""

    stage_pair: tuple[int, int]
    closed: bool
    offenders: list[str]
    degrees: list[int]
    dims: dict[int, tuple[int, int, int]] = field(default_factory=dict)
    additive_ok: bool = False
    inclusion_chain_ok: bool = False
    restriction_chain_ok: bool = False
    exact_ok: bool = False

    @property
    def ok(self) -> bool:
        return (
            self.closed
            and self.additive_ok
            and self.inclusion_chain_ok
            and self.restriction_chain_ok
            and self.exact_ok
        )


def subalgebra_below_stage(algebra: FreeDgAlgebra, stage: int) -> FreeDgAlgebra:
    """The subalgebra generated by all generators of stage < ``stage``."""
    gens = [g for g in algebra.generators.values() if g.resolved_stage() < stage]
    sub = FreeDgAlgebra(
        algebra.kind,
        algebra.grading,
        gens,
        name=f"{algebra.name or 'A'}(<{stage})",
        allow_nonpositive=algebra.allow_nonpositive,
    )
    kept = {g.name for g in gens}
    for g in gens:
        for mono in algebra.diff[g.name]:
            if any(letter not in kept for letter in mono):
                raise ValueError(
                    f"stage-{stage} subalgebra is not closed under d at {g.name!r}"
                )
        sub.set_differential(g.name, algebra.diff[g.name])
    return sub


def restriction_sequence(
    algebra: FreeDgAlgebra,
    coefficients: Coefficients,
    stage_low: int,
    stage_high: int,
    degrees: Sequence[int],
) -> RestrictionSequence:
    """Check the short exact sequence of derivation complexes for a stage pair.

    Left: derivations vanishing below stage_high; middle: vanishing below
    stage_low; right: derivations of the stage_high subalgebra vanishing below
    stage_low.  Verified per degree: dimensions add, both maps are chain maps,
    and kernel(restriction) = image(inclusion).
    """
    if stage_low > stage_high:
        raise ValueError("stage_low must be <= stage_high")
    below_high = {
        g for g in algebra.generators if algebra.gen_stage(g) < stage_high
    }
    below_low = {g for g in algebra.generators if algebra.gen_stage(g) < stage_low}
    offenders = closure_offenders(algebra, frozenset(below_high))
    offenders += [g for g in closure_offenders(algebra, frozenset(below_low)) if g not in offenders]
    report = RestrictionSequence(
        stage_pair=(stage_low, stage_high),
        closed=not offenders,
        offenders=offenders,
        degrees=list(degrees),
    )
    if offenders:
        return report

    left = DerComplex(algebra, coefficients, vanishing=below_high)
    middle = DerComplex(algebra, coefficients, vanishing=below_low)
    sub = subalgebra_below_stage(algebra, stage_high)
    sub_u = AlgebraMorphism(
        sub,
        coefficients.algebra,
        {g: coefficients.morphism.images[g] for g in sub.generators},
    )
    right = DerComplex(sub, Coefficients(coefficients.algebra, sub_u), vanishing=below_low)

    additive = True
    incl_chain = True
    rest_chain = True
    exact = True

    def inclusion_matrix(p: int) -> Matrix:
        src = left.basis(p)
        tgt = middle.basis(p)
        index = {slot: j for j, slot in enumerate(tgt)}
        m = Matrix(len(src), len(tgt))
        for i, slot in enumerate(src):
            m.set(i, index[slot], 1)
        return m

    def restriction_matrix(p: int) -> Matrix:
        src = middle.basis(p)
        tgt = right.basis(p)
        index = {slot: j for j, slot in enumerate(tgt)}
        m = Matrix(len(src), len(tgt))
        for i, slot in enumerate(src):
            if slot in index:
                m.set(i, index[slot], 1)
        return m

    for p in degrees:
        nl, nm, nr = len(left.basis(p)), len(middle.basis(p)), len(right.basis(p))
        report.dims[p] = (nl, nm, nr)
        if nl + nr != nm:
            additive = False
        incl_p, incl_p1 = inclusion_matrix(p), inclusion_matrix(p + 1)
        rest_p, rest_p1 = restriction_matrix(p), restriction_matrix(p + 1)
        d_left = left.complex().d(p)
        d_mid = middle.complex().d(p)
        d_right = right.complex().d(p)
        if [dict(r) for r in incl_p.compose(d_mid).rows] != [
            dict(r) for r in d_left.compose(incl_p1).rows
        ]:
            incl_chain = False
        if [dict(r) for r in d_mid.compose(rest_p1).rows] != [
            dict(r) for r in rest_p.compose(d_right).rows
        ]:
            rest_chain = False
        # Exactness: inclusion injective, restriction surjective, ker = im.
        if incl_p.rank() != nl or rest_p.rank() != nr:
            exact = False
        if not spans_equal(rest_p.kernel_basis(), incl_p.image_basis()):
            exact = False

    report.additive_ok = additive
    report.inclusion_chain_ok = incl_chain
    report.restriction_chain_ok = rest_chain
    report.exact_ok = exact
    return report


# ---------------------------------------------------------------------- cone


ConeLabel = tuple  # ("alg", monomial) or ("der", generator, monomial)


class ConeComplex:
    """Mapping cone of the adjoint map q ↦ [q, −] into the derivations.

    Degree p holds the algebra in degree p and the derivations in degree
    p − 1; the differential is D(q, φ) = (dq, Ad_q − ∂φ).  The filtration
    puts the algebra summand at level 0 and a derivation slot at the stage of
    its generator plus one.
    """

    def __init__(self, algebra: FreeDgAlgebra) -> None:
        self.A = algebra
        self.der = DerComplex(algebra, Coefficients.identity(algebra), name="Der")
        self._complex: CochainComplex | None = None

    def basis(self, p: int) -> list[ConeLabel]:
        out: list[ConeLabel] = [("alg", mono) for mono in self.A.basis_in_cdeg(p)]
        out.extend(("der", v, mono) for v, mono in self.der.basis(p - 1))
        return out

    def filtration_level(self, label: ConeLabel) -> int:
        if label[0] == "alg":
            return 0
        return self.A.gen_stage(label[1]) + 1

    def adjoint_values(self, q: Element) -> Values:
        """Ad_q: the inner derivation w ↦ [q, w] on generators."""
        out: Values = {}
        for w in self.der.slots:
            term = self.A.commutator(q, self.A.gen_element(w))
            if term:
                out[w] = term
        return out

    def complex(self) -> CochainComplex:
        if self._complex is None:

            def basis_fn(p: int) -> list[ConeLabel]:
                return self.basis(p)

            def diff_fn(p: int) -> Matrix:
                src = self.basis(p)
                tgt = self.basis(p + 1)
                index = {label: j for j, label in enumerate(tgt)}
                m = Matrix(len(src), len(tgt))
                for i, label in enumerate(src):
                    if label[0] == "alg":
                        mono = label[1]
                        dq = self.A.differential({mono: Fraction(1)})
                        for dm, dc in dq.items():
                            m.add_to(i, index[("alg", dm)], dc)
                        for w, el in self.adjoint_values({mono: Fraction(1)}).items():
                            for am, ac in el.items():
                                m.add_to(i, index[("der", w, am)], ac)
                    else:
                        _, v, mono = label
                        image = self.der.differential_values(
                            {v: {mono: Fraction(1)}}, p - 1
                        )
                        for w, el in image.items():
                            for dm, dc in el.items():
                                m.add_to(i, index[("der", w, dm)], -dc)
                return m

            self._complex = CochainComplex(basis_fn, diff_fn, name="cone")
        return self._complex


# ------------------------------------------------- semidirect-product bracket


@dataclass
class SemidirectElement:
    """A λ-homogeneous element (x, φ) of Der(A) ⋉ A.

    Both parts sit in the same λ-degree: the algebra part has cohomological
    degree λ and the derivation part has derivation degree λ.
    """

    algebra_part: Element
    der_values: Values
    degree: int


def semidirect_bracket(
    der: DerComplex, a: SemidirectElement, b: SemidirectElement
) -> SemidirectElement:
    """[x+φ, y+ψ] = ([x,y] + φ(y) − (−1)^{λ(a)λ(b)} ψ(x), [φ,ψ])."""
    A = der.A
    sign = Fraction(-1) if (a.degree % 2) and (b.degree % 2) else Fraction(1)
    alg = A.commutator(a.algebra_part, b.algebra_part) if a.algebra_part and b.algebra_part else {}
    alg = el_add(alg, der.apply(a.der_values, a.degree, b.algebra_part))
    alg = el_add(alg, der.apply(b.der_values, b.degree, a.algebra_part), -sign)
    values = der.lie_bracket(a.der_values, a.degree, b.der_values, b.degree)
    return SemidirectElement(alg, values, a.degree + b.degree)


def semidirect_differential(der: DerComplex, a: SemidirectElement) -> SemidirectElement:
    """D(x, φ) = (dx, ∂φ) — a derivation of the semidirect bracket."""
    return SemidirectElement(
        der.A.differential(a.algebra_part),
        der.differential_values(a.der_values, a.degree),
        a.degree + 1,
    )
