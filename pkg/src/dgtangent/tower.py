"""Filtered cochain complexes and their spectral sequences.

A filtration here is decreasing and spanned by basis elements: each basis
element of the underlying complex carries an integer level ≥ 0, and F^s is
the span of the elements with level ≥ s.  The differential must not lower
levels (checked).  Two independent computations of the pages are provided:

- the filtered route: E_r^{s,t} = Z_r^s / (Z_{r−1}^{s+1} + d·Z_{r−1}^{s−r+1})
  with Z_r^s = {x ∈ F^s : dx ∈ F^{s+r}}, and d_r induced by d on
  representatives (bidegree (r, 1−r));
- the exact-couple route: D^{s} = H(F^0/F^{s+1}), E^{s} = H(F^s/F^{s+1}),
  with the derived couples unwound through explicit linear solves.

Both are exact; ``alignment_check`` verifies they produce identical page
dimensions and, after the canonical change of basis, identical d_r matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Sequence

from .complexes import CochainComplex, HomologyData
from .linalg import (
    Matrix,
    Subquotient,
    Vector,
    preimage_by_images,
    preimage_in_span,
    span_contains,
    vec_add,
)


class FilteredComplex:
    """A cochain complex whose basis elements carry filtration levels."""

    def __init__(
        self,
        complex: CochainComplex,
        level_fn: Callable[[Hashable], int],
        max_level: int,
        name: str = "",
    ) -> None:
        self.complex = complex
        self._level_fn = level_fn
        self.max_level = max_level
        self.name = name
        self._levels: dict[int, list[int]] = {}

    def levels(self, n: int) -> list[int]:
        if n not in self._levels:
            out = []
            for label in self.complex.basis(n):
                lvl = self._level_fn(label)
                if lvl < 0 or lvl > self.max_level:
                    raise ValueError(f"filtration level {lvl} out of range")
                out.append(lvl)
            self._levels[n] = out
        return self._levels[n]

    def basis_vectors_at_least(self, n: int, s: int) -> list[Vector]:
        """Unit vectors spanning F^s in degree n."""
        return [
            {i: Fraction(1)}
            for i, lvl in enumerate(self.levels(n))
            if lvl >= s
        ]

    def check_filtration(self, degrees: Sequence[int]) -> list[str]:
        """Degrees and positions where d lowers the filtration level."""
        bad = []
        for n in degrees:
            lv_src = self.levels(n)
            lv_tgt = self.levels(n + 1)
            d = self.complex.d(n)
            for i, row in enumerate(d.rows):
                for j in row:
                    if lv_tgt[j] < lv_src[i]:
                        bad.append(f"degree {n} position {i} -> {j}")
        return bad


class SpectralSequence:
    """Pages of a filtered complex via the Z/B subquotient realization."""

    def __init__(self, fc: FilteredComplex) -> None:
        self.fc = fc
        self._z_cache: dict[tuple[int, int, int], list[Vector]] = {}
        self._entry_cache: dict[tuple[int, int, int], Subquotient] = {}

    @property
    def stable_page(self) -> int:
        """Every page from here on equals E_∞ (finite filtration)."""
        return self.fc.max_level + 2

    def z_span(self, r: int, s: int, n: int) -> list[Vector]:
        """Spanning set of Z_r^s = {x ∈ F^s ∩ C^n : dx ∈ F^{s+r}}."""
        key = (r, s, n)
        if key not in self._z_cache:
            vectors = self.fc.basis_vectors_at_least(n, s)
            target = self.fc.basis_vectors_at_least(n + 1, s + r)
            d = self.fc.complex.d(n)
            self._z_cache[key] = preimage_in_span(vectors, d, target)
        return self._z_cache[key]

    def entry(self, r: int, s: int, n: int) -> Subquotient:
        """E_r^{s, n−s} as a subquotient of C^n."""
        if r < 1:
            raise ValueError("pages are defined for r >= 1")
        key = (r, s, n)
        if key not in self._entry_cache:
            numerators = self.z_span(r, s, n)
            denominators = list(self.z_span(r - 1, s + 1, n))
            d_prev = self.fc.complex.d(n - 1)
            for v in self.z_span(r - 1, s - r + 1, n - 1):
                img = d_prev.apply(v)
                if img:
                    denominators.append(img)
            self._entry_cache[key] = Subquotient(numerators, denominators)
        return self._entry_cache[key]

    def dim(self, r: int, s: int, t: int) -> int:
        return self.entry(r, s, s + t).dim

    def d_matrix(self, r: int, s: int, t: int) -> Matrix:
        """The differential E_r^{s,t} → E_r^{s+r, t−r+1} on chosen bases."""
        n = s + t
        src = self.entry(r, s, n)
        tgt = self.entry(r, s + r, n + 1)
        d = self.fc.complex.d(n)
        m = Matrix(src.dim, tgt.dim)
        for i, rep in enumerate(src.basis):
            coords = tgt.reduce(d.apply(rep))
            for j, c in coords.items():
                m.set(i, j, c)
        return m

    def page_dims(
        self, r: int, total_degrees: Sequence[int]
    ) -> dict[tuple[int, int], int]:
        """Nonzero entries (s, t) → dim over a window of total degrees."""
        out: dict[tuple[int, int], int] = {}
        for n in total_degrees:
            for s in range(0, self.fc.max_level + 1):
                dim = self.entry(r, s, n).dim
                if dim:
                    out[(s, n - s)] = dim
        return out

    def einf_dims(self, total_degrees: Sequence[int]) -> dict[tuple[int, int], int]:
        return self.page_dims(self.stable_page, total_degrees)

    # ------------------------------------------------------- class tracking

    def survives_to(self, x: Vector, n: int, s: int, r_prime: int) -> bool:
        """True when some x + c, c ∈ F^{s+1}, has d(x+c) ∈ F^{s+r'+1}.

        Equivalently the class of x is alive on page r'+1; the first r' where
        this fails is the page whose differential kills the class.
        """
        d = self.fc.complex.d(n)
        dx = d.apply(x)
        correctable = [
            d.apply(v) for v in self.fc.basis_vectors_at_least(n, s + 1)
        ]
        correctable = [v for v in correctable if v]
        allowed = self.fc.basis_vectors_at_least(n + 1, s + r_prime + 1)
        return span_contains(correctable + allowed, dx)

    def death_page(
        self, x: Vector, n: int, s: int, r_start: int = 1
    ) -> int | None:
        """First page r' ≥ r_start where the class supports a differential.

        None when the class survives to E_∞.
        """
        for r_prime in range(r_start, self.stable_page + 1):
            if not self.survives_to(x, n, s, r_prime):
                return r_prime
        return None

    # -------------------------------------------------- comparison with H

    def total_degree_check(
        self, total_degrees: Sequence[int]
    ) -> dict[int, tuple[int, int, bool]]:
        """Per total degree: (Σ_s dim E_∞^{s, n−s}, dim H^n, equal?)."""
        out: dict[int, tuple[int, int, bool]] = {}
        r = self.stable_page
        for n in total_degrees:
            total = sum(
                self.entry(r, s, n).dim for s in range(0, self.fc.max_level + 1)
            )
            h = self.fc.complex.homology(n).dim
            out[n] = (total, h, total == h)
        return out


class FilteredChainMap:
    """A filtration-respecting chain map between filtered complexes."""

    def __init__(
        self,
        source: FilteredComplex,
        target: FilteredComplex,
        matrix_fn: Callable[[int], Matrix],
        name: str = "",
    ) -> None:
        self.source = source
        self.target = target
        self._matrix_fn = matrix_fn
        self._cache: dict[int, Matrix] = {}
        self.name = name

    def matrix(self, n: int) -> Matrix:
        if n not in self._cache:
            m = self._matrix_fn(n)
            expected = (self.source.complex.dim(n), self.target.complex.dim(n))
            if (m.nrows, m.ncols) != expected:
                raise ValueError(f"chain map shape mismatch at degree {n}")
            self._cache[n] = m
        return self._cache[n]

    def check(self, degrees: Sequence[int]) -> list[str]:
        problems = []
        for n in degrees:
            lhs = self.matrix(n).compose(self.target.complex.d(n))
            rhs = self.source.complex.d(n).compose(self.matrix(n + 1))
            if [dict(r) for r in lhs.rows] != [dict(r) for r in rhs.rows]:
                problems.append(f"not a chain map at degree {n}")
            lv_src = self.source.levels(n)
            lv_tgt = self.target.levels(n)
            for i, row in enumerate(self.matrix(n).rows):
                for j in row:
                    if lv_tgt[j] < lv_src[i]:
                        problems.append(
                            f"filtration dropped at degree {n}, {i} -> {j}"
                        )
                        break
        return problems

    def page_matrix(
        self, ss_src: SpectralSequence, ss_tgt: SpectralSequence, r: int, s: int, n: int
    ) -> Matrix:
        src = ss_src.entry(r, s, n)
        tgt = ss_tgt.entry(r, s, n)
        phi = self.matrix(n)
        m = Matrix(src.dim, tgt.dim)
        for i, rep in enumerate(src.basis):
            coords = tgt.reduce(phi.apply(rep))
            for j, c in coords.items():
                m.set(i, j, c)
        return m

    def commutes_with_page_differential(
        self, ss_src: SpectralSequence, ss_tgt: SpectralSequence, r: int, s: int, t: int
    ) -> bool:
        n = s + t
        d_src = ss_src.d_matrix(r, s, t)
        d_tgt = ss_tgt.d_matrix(r, s, t)
        phi_here = self.page_matrix(ss_src, ss_tgt, r, s, n)
        phi_next = self.page_matrix(ss_src, ss_tgt, r, s + r, n + 1)
        lhs = d_src.compose(phi_next)
        rhs = phi_here.compose(d_tgt)
        return [dict(r_) for r_ in lhs.rows] == [dict(r_) for r_ in rhs.rows]


# ------------------------------------------------------- exact couple route


class ExactCoupleSS:
    """The same spectral sequence through the exact couple of the filtration.

    D^{s} = H(F^0/F^{s+1}) and E^{s} = H(F^s/F^{s+1}); the maps are
    i (projection-induced), j (connecting morphism of the three-layer
    sequence) and k (inclusion-induced).  Derived pages are maintained as
    subquotients of the E_1 class coordinates, with i^{r−1} inverted by a
    linear solve when evaluating d_r = j_r ∘ k_r.
    """

    def __init__(self, fc: FilteredComplex) -> None:
        self.fc = fc
        self._quot_cache: dict[tuple[int, int], CochainComplex] = {}
        self._indices_cache: dict[tuple[int, int, int], list[int]] = {}
        self._page_cache: dict[tuple[int, int, int], tuple[list[Vector], list[Vector]]] = {}
        self._sub_cache: dict[tuple[int, int, int], Subquotient] = {}
        self._i_cache: dict[tuple[int, int], Matrix] = {}
        self._ipow_cache: dict[tuple[int, int, int], Matrix] = {}

    # ----------------------------------------------------- quotient layers

    def indices(self, a: int, b: int, n: int) -> list[int]:
        """Positions of basis elements of C^n with a ≤ level < b."""
        key = (a, b, n)
        if key not in self._indices_cache:
            self._indices_cache[key] = [
                i for i, lvl in enumerate(self.fc.levels(n)) if a <= lvl < b
            ]
        return self._indices_cache[key]

    def quotient_complex(self, a: int, b: int) -> CochainComplex:
        """F^a/F^b as a complex on the basis elements with a ≤ level < b."""
        key = (a, b)
        if key not in self._quot_cache:

            def basis_fn(n: int, a=a, b=b) -> list[Hashable]:
                base = self.fc.complex.basis(n)
                return [base[i] for i in self.indices(a, b, n)]

            def diff_fn(n: int, a=a, b=b) -> Matrix:
                src = self.indices(a, b, n)
                tgt = self.indices(a, b, n + 1)
                tgt_pos = {amb: j for j, amb in enumerate(tgt)}
                d = self.fc.complex.d(n)
                m = Matrix(len(src), len(tgt))
                for i, amb in enumerate(src):
                    for col, val in d.rows[amb].items():
                        if col in tgt_pos:
                            m.add_to(i, tgt_pos[col], val)
                return m

            self._quot_cache[key] = CochainComplex(
                basis_fn, diff_fn, name=f"F{a}/F{b}"
            )
        return self._quot_cache[key]

    def D(self, s: int, n: int) -> HomologyData:
        return self.quotient_complex(0, s + 1).homology(n)

    def E(self, s: int, n: int) -> HomologyData:
        return self.quotient_complex(s, s + 1).homology(n)

    # --------------------------------------------------------- local/ambient

    def to_ambient(self, a: int, b: int, n: int, local: Vector) -> Vector:
        idx = self.indices(a, b, n)
        return {idx[i]: c for i, c in local.items()}

    def to_local(self, a: int, b: int, n: int, ambient: Vector) -> Vector:
        """Project an ambient vector to the (a ≤ level < b) coordinates."""
        pos = {amb: j for j, amb in enumerate(self.indices(a, b, n))}
        return {pos[i]: c for i, c in ambient.items() if i in pos}

    # ------------------------------------------------------------- the maps

    def i_matrix(self, s: int, n: int) -> Matrix:
        """D(s, n) → D(s−1, n), induced by the projection F0/F^{s+1} → F0/F^s."""
        key = (s, n)
        if key in self._i_cache:
            return self._i_cache[key]
        src = self.D(s, n)
        tgt = self.D(s - 1, n)
        m = Matrix(src.dim, tgt.dim)
        for a_idx, rep in enumerate(src.representatives):
            amb = self.to_ambient(0, s + 1, n, rep)
            local = self.to_local(0, s, n, amb)
            coords = tgt.reduce(local)
            for j, c in coords.items():
                m.set(a_idx, j, c)
        self._i_cache[key] = m
        return m

    def connecting(self, s: int, n: int, rep_local: Vector) -> Vector:
        """j on a D(s, n) representative: class coords in E(s+1, n+1)."""
        amb = self.to_ambient(0, s + 1, n, rep_local)
        d_amb = self.fc.complex.d(n).apply(amb)
        layer = self.to_local(s + 1, s + 2, n + 1, d_amb)
        return self.E(s + 1, n + 1).reduce(layer)

    def k_coords(self, s: int, n: int, e_rep_local: Vector) -> Vector:
        """k on an E(s, n) representative: class coords in D(s, n)."""
        amb = self.to_ambient(s, s + 1, n, e_rep_local)
        local = self.to_local(0, s + 1, n, amb)
        return self.D(s, n).reduce(local)

    # ------------------------------------------------------------- d_r data

    def _i_power_matrix(self, s: int, n: int, r: int) -> Matrix:
        """i^{r−1}: D(s+r−1, n) → D(s, n) as a class-coordinate matrix."""
        key = (s, n, r)
        if key in self._ipow_cache:
            return self._ipow_cache[key]
        dim = self.D(s + r - 1, n).dim
        m = Matrix(dim, dim)
        for a in range(dim):
            m.set(a, a, 1)
        # Identity when r == 1; otherwise compose the i-steps downwards.
        current = m
        for sigma in range(s + r - 1, s, -1):
            current = current.compose(self.i_matrix(sigma, n))
        self._ipow_cache[key] = current
        return current

    def draw(self, r: int, s: int, n: int, z: Vector) -> Vector:
        """d_r of an E_1-class-coordinate vector z at (s, n).

        Returns E_1 class coordinates at (s + r, n + 1).  Well defined modulo
        the page boundaries of the target; callers reduce in the target page.
        """
        e_group = self.E(s, n)
        x_local: Vector = {}
        for i, c in z.items():
            x_local = vec_add(x_local, e_group.representatives[i], c)
        kx = self.k_coords(s, n, x_local)
        if r == 1:
            y = kx
        else:
            m = self._i_power_matrix(s, n, r)
            y = m.solve(kx)
            if y is None:
                raise ValueError(
                    f"class at (s={s}, n={n}) is not in the image of i^{r-1}; "
                    "it does not live on this page"
                )
        d_group = self.D(s + r - 1, n)
        y_local: Vector = {}
        for a, c in y.items():
            y_local = vec_add(y_local, d_group.representatives[a], c)
        return self.connecting(s + r - 1, n, y_local)

    def page_data(self, r: int, s: int, n: int) -> tuple[list[Vector], list[Vector]]:
        """(numerators, denominators) of E_r in E_1 class coordinates."""
        key = (r, s, n)
        if key in self._page_cache:
            return self._page_cache[key]
        if r == 1:
            dim = self.E(s, n).dim
            data = ([{i: Fraction(1)} for i in range(dim)], [])
        else:
            z_prev, b_prev = self.page_data(r - 1, s, n)
            sub_prev = self.page_subquotient(r - 1, s, n)
            z_basis = sub_prev.basis  # span-basis of Z_{r-1} mod nothing extra
            # Z_r: elements of span(Z_{r-1}) whose d_{r-1} lies in the target
            # boundaries.
            tgt_b = self.page_data(r - 1, s + r - 1, n + 1)[1]
            tgt_dim = self.E(s + r - 1, n + 1).dim
            images = [self.draw(r - 1, s, n, zb) for zb in z_prev]
            z_new = preimage_by_images(z_prev, images, tgt_b, tgt_dim)
            # B_r: previous boundaries plus d_{r-1} arriving from (s-r+1, n-1).
            b_new = list(b_prev)
            if s - (r - 1) >= 0:
                src_z = self.page_data(r - 1, s - (r - 1), n - 1)[0]
                for zb in src_z:
                    img = self.draw(r - 1, s - (r - 1), n - 1, zb)
                    if img:
                        b_new.append(img)
            data = (z_new, b_new)
        self._page_cache[key] = data
        return data

    def page_subquotient(self, r: int, s: int, n: int) -> Subquotient:
        key = (r, s, n)
        if key not in self._sub_cache:
            z, b = self.page_data(r, s, n)
            self._sub_cache[key] = Subquotient(z, b)
        return self._sub_cache[key]

    def dim(self, r: int, s: int, t: int) -> int:
        return self.page_subquotient(r, s, s + t).dim

    def d_matrix(self, r: int, s: int, t: int) -> Matrix:
        n = s + t
        src = self.page_subquotient(r, s, n)
        tgt = self.page_subquotient(r, s + r, n + 1)
        m = Matrix(src.dim, tgt.dim)
        for i, rep in enumerate(src.basis):
            coords = tgt.reduce(self.draw(r, s, n, rep))
            for j, c in coords.items():
                m.set(i, j, c)
        return m


@dataclass
class AlignmentResult:
    """Comparison of the filtered and exact-couple routes at one (r, s, t)."""

    r: int
    s: int
    t: int
    dim_filtered: int
    dim_couple: int
    dims_equal: bool
    transport_invertible: bool
    d_matrices_equal: bool

    @property
    def ok(self) -> bool:
        return self.dims_equal and self.transport_invertible and self.d_matrices_equal


def transport_matrix(
    ss: SpectralSequence, ec: ExactCoupleSS, r: int, s: int, n: int
) -> Matrix:
    """Filtered-route page basis → couple-route page coordinates.

    A filtered representative x ∈ F^s maps to its layer class in E_1 = H(F^s/F^{s+1})
    and then to coordinates of the couple page.
    """
    src = ss.entry(r, s, n)
    tgt = ec.page_subquotient(r, s, n)
    m = Matrix(src.dim, tgt.dim)
    for i, rep in enumerate(src.basis):
        layer = ec.to_local(s, s + 1, n, rep)
        e1 = ec.E(s, n).reduce(layer)
        coords = tgt.reduce(e1)
        for j, c in coords.items():
            m.set(i, j, c)
    return m


def alignment_check(
    ss: SpectralSequence, ec: ExactCoupleSS, r: int, s: int, t: int
) -> AlignmentResult:
    n = s + t
    dim_f = ss.entry(r, s, n).dim
    dim_c = ec.page_subquotient(r, s, n).dim
    dims_equal = dim_f == dim_c
    t_here = transport_matrix(ss, ec, r, s, n)
    t_next = transport_matrix(ss, ec, r, s + r, n + 1)
    invertible = dims_equal and t_here.rank() == dim_f
    d_f = ss.d_matrix(r, s, t)
    d_c = ec.d_matrix(r, s, t)
    lhs = d_f.compose(t_next)
    rhs = t_here.compose(d_c)
    matrices_equal = [dict(row) for row in lhs.rows] == [dict(row) for row in rhs.rows]
    return AlignmentResult(
        r, s, t, dim_f, dim_c, dims_equal, invertible, matrices_equal
    )


# ----------------------------------------------- towers of specific origin


def der_tower(der) -> FilteredComplex:
    """Filtration of a derivation complex by the stage of the source slot.

    F^s is spanned by the derivations vanishing on generators of stage < s;
    these are subcomplexes exactly when each stage is closed under d, which
    holds for any algebra passing the stage condition.
    """
    gens = [g for g in der.A.generators.values() if g.name not in der.vanishing]
    max_level = max((g.resolved_stage() for g in gens), default=0)
    cx = der.complex()

    def level(label) -> int:
        return der.slot_stage(label)

    return FilteredComplex(cx, level, max_level, name=f"tower({cx.name})")


def cone_tower(cone) -> FilteredComplex:
    """Filtration of the adjoint cone: algebra part at level 0, derivation
    slots at stage + 1."""
    gens = cone.A.generators.values()
    max_level = max((g.resolved_stage() for g in gens), default=0) + 1
    cx = cone.complex()
    return FilteredComplex(
        cx, cone.filtration_level, max_level, name=f"cone-tower({cone.A.name})"
    )


# ------------------------------------------------------- collapse analysis


@dataclass
class CollapseReport:
    """Support of E_1 over a window and the collapse it implies."""

    support: dict[tuple[int, int], int]
    rows: list[int] = field(default_factory=list)
    columns: list[int] = field(default_factory=list)
    predicted_page: int | None = None
    reason: str = ""
    verified: bool = False
    region_ok: bool | None = None

    def as_record(self) -> dict:
        return {
            "rows": self.rows,
            "columns": self.columns,
            "predicted_page": self.predicted_page,
            "reason": self.reason,
            "verified": self.verified,
            "region_ok": self.region_ok,
        }


def collapse_report(
    ss: SpectralSequence,
    total_degrees: Sequence[int],
    allowed_region: Callable[[int, int], bool] | None = None,
) -> CollapseReport:
    """Detect single-row/column collapse and verify it against E_∞.

    A single row (constant t) forces E_2 = E_∞ since d_r moves t for r ≥ 2;
    a single column (constant s) forces E_1 = E_∞.  When an expected support
    region is supplied, membership of every nonzero entry is checked.
    """
    support = ss.page_dims(1, total_degrees)
    rows = sorted({t for (_, t) in support})
    columns = sorted({s for (s, _) in support})
    report = CollapseReport(support=support, rows=rows, columns=columns)
    if allowed_region is not None:
        report.region_ok = all(allowed_region(s, t) for (s, t) in support)
    if len(columns) <= 1:
        report.predicted_page = 1
        report.reason = "single column: every d_r changes the column"
    elif len(rows) <= 1:
        report.predicted_page = 2
        report.reason = "single row: d_r for r >= 2 leaves the row"
    if report.predicted_page is not None:
        r_pred = report.predicted_page
        stable = ss.stable_page
        report.verified = all(
            ss.entry(r_pred, s, n).dim == ss.entry(stable, s, n).dim
            for n in total_degrees
            for s in range(0, ss.fc.max_level + 1)
        )
    return report
