"""Fock bases for two wells: fixed-N sectors and the loss-truncated full space.

States are ordered with the well-A occupation decreasing.  In the full
(truncated) space the fixed-N sectors are stacked as contiguous blocks with
the total particle number decreasing from Nmax down to 0, so the vacuum sits
in the bottom-right corner.
"""

from dataclasses import dataclass, field
from typing import NamedTuple


class FockState(NamedTuple):
    """Occupations (nA, nB) of the two wells."""

    na: int
    nb: int


class BasisMismatchError(ValueError):
    """Operands live on different Fock bases."""


@dataclass(frozen=True)
class FockBasis:
    """Ordered list of two-well Fock states with positional lookup.

    kind is "sector" (fixed total number n) or "full" (all totals up to n).
    Equality compares (kind, n) only; the state list is determined by them.
    """

    kind: str
    n: int
    states: tuple = field(compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("sector", "full"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        index = {s: i for i, s in enumerate(self.states)}
        object.__setattr__(self, "_index", index)

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, state: FockState) -> int:
        try:
            return self._index[FockState(*state)]
        except KeyError:
            raise KeyError(f"state {state} not in {self.kind}({self.n}) basis")

    def __contains__(self, state) -> bool:
        return FockState(*state) in self._index

    def label(self) -> str:
        return f"{self.kind}({self.n})"


def _sector_states(n: int):
    return [FockState(n - k, k) for k in range(n + 1)]


def sector_basis(n: int) -> FockBasis:
    """Fixed-N basis |n,0>, |n-1,1>, ..., |0,n| (nA decreasing)."""
    if n < 0:
        raise ValueError("particle number must be non-negative")
    return FockBasis("sector", n, tuple(_sector_states(n)))


def full_basis(nmax: int) -> FockBasis:
    """All states with nA+nB <= nmax, sector blocks descending in total N."""
    if nmax < 0:
        raise ValueError("particle number must be non-negative")
    states = []
    for m in range(nmax, -1, -1):
        states.extend(_sector_states(m))
    return FockBasis("full", nmax, tuple(states))


def sector_slices(basis: FockBasis) -> list:
    """Contiguous (total N, slice) blocks of a full basis, N descending."""
    if basis.kind != "full":
        raise ValueError("sector_slices requires a full basis")
    out = []
    start = 0
    for m in range(basis.n, -1, -1):
        out.append((m, slice(start, start + m + 1)))
        start += m + 1
    return out


def check_same_basis(a: FockBasis, b: FockBasis) -> None:
    if a != b:
        raise BasisMismatchError(f"basis mismatch: {a.label()} vs {b.label()}")
