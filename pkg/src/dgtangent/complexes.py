"""Graded cochain complexes with exact homology and chosen representatives.

A complex is described by two callables: one producing the (finite, ordered)
basis of each cohomological degree, the other producing the differential
matrix from degree n to degree n+1 in those bases.  Both are cached, so a
complex can be backed by expensive symbolic enumeration and still be queried
repeatedly.

All degrees here are cohomological.  Models stored with homological grading
convert on the way in (degree n becomes -n) and back on the way out; the
helpers at the bottom centralize that convention.
"""

from __future__ import annotations

from typing import Callable, Hashable, Sequence

from .linalg import Matrix, Subquotient, Vector


class HomologyData:
    """Cohomology of one degree: dimension, representatives, class reduction."""

    def __init__(self, cycles: list[Vector], boundaries: list[Vector]) -> None:
        self._sub = Subquotient(cycles, boundaries)
        self.cycles = cycles
        self.boundaries = boundaries

    @property
    def dim(self) -> int:
        return self._sub.dim

    @property
    def representatives(self) -> list[Vector]:
        """Chosen cocycle representatives, one per class-basis slot."""
        return self._sub.basis

    def reduce(self, cocycle: Vector) -> Vector:
        """Coordinates of a cocycle's class over the representative basis."""
        return self._sub.reduce(cocycle)

    def is_zero_class(self, cocycle: Vector) -> bool:
        return self._sub.is_zero_class(cocycle)


class CochainComplex:
    """A cochain complex given by per-degree bases and differential matrices."""

    def __init__(
        self,
        basis_fn: Callable[[int], Sequence[Hashable]],
        diff_fn: Callable[[int], Matrix],
        name: str = "",
    ) -> None:
        self._basis_fn = basis_fn
        self._diff_fn = diff_fn
        self.name = name
        self._basis_cache: dict[int, list[Hashable]] = {}
        self._diff_cache: dict[int, Matrix] = {}
        self._homology_cache: dict[int, HomologyData] = {}

    def basis(self, n: int) -> list[Hashable]:
        if n not in self._basis_cache:
            self._basis_cache[n] = list(self._basis_fn(n))
        return self._basis_cache[n]

    def dim(self, n: int) -> int:
        return len(self.basis(n))

    def d(self, n: int) -> Matrix:
        """Differential matrix from degree n to degree n+1."""
        if n not in self._diff_cache:
            m = self._diff_fn(n)
            expected = (self.dim(n), self.dim(n + 1))
            if (m.nrows, m.ncols) != expected:
                raise ValueError(
                    f"differential shape {(m.nrows, m.ncols)} != bases {expected} at degree {n}"
                )
            self._diff_cache[n] = m
        return self._diff_cache[n]

    def d_squared_failures(self, degrees: Sequence[int]) -> list[int]:
        """Degrees n in the list where d(n+1)∘d(n) is not zero."""
        bad = []
        for n in degrees:
            if not self.d(n).compose(self.d(n + 1)).is_zero():
                bad.append(n)
        return bad

    def homology(self, n: int) -> HomologyData:
        if n not in self._homology_cache:
            cycles = self.d(n).kernel_basis()
            boundaries = [row for row in self.d(n - 1).rows if row]
            self._homology_cache[n] = HomologyData(cycles, boundaries)
        return self._homology_cache[n]

    def homology_dims(self, degrees: Sequence[int]) -> dict[int, int]:
        return {n: self.homology(n).dim for n in degrees}


GRADING_HOMOLOGICAL = "homological"
GRADING_COHOMOLOGICAL = "cohomological"


def to_cohomological(degree: int, grading: str) -> int:
    """Internal (cohomological) degree of an element stored with ``grading``."""
    if grading == GRADING_HOMOLOGICAL:
        return -degree
    if grading == GRADING_COHOMOLOGICAL:
        return degree
    raise ValueError(f"unknown grading {grading!r}")


def from_cohomological(cdegree: int, grading: str) -> int:
    """Native degree, for reporting, of an internal cohomological degree."""
    return to_cohomological(cdegree, grading)  # the conversion is an involution
