"""Persistency-of-nonlocality bounds from critical-noise tables.

Removing k parties from an N-party W state leaves the W/vacuum mixture with
n = N - k parties and vacuum weight k/N.  If the n-party threshold p_crit(n)
exceeds k/N the reduced state is still nonlocal, so the minimal removal count
is at least k + 1.  The fixed-N scan below turns any table of thresholds
(closed-form family values for even n, LP certificates elsewhere) into that
lower bound.  The upper bound comes from splitting the parties into m groups
and simulating an m-setting Bell test with commuting measurements on a
permutation-invariant state: N - floor(N/m) removals always suffice to reach
a local model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .bellfamily import pcrit_family
from .errors import TableGapError
from .symcorr import Scalar


@dataclass(frozen=True)
class TableEntry:
    p_crit: Scalar
    source: str  # "family" | "lp" | caller-defined

    def __post_init__(self):
        if not 0 <= self.p_crit < 1:
            raise ValueError(f"p_crit {self.p_crit} outside [0, 1)")


@dataclass(frozen=True)
class PCritTable:
    """Thresholds per party count for one settings count m."""

    m: int
    entries: Mapping[int, TableEntry]

    def get(self, n: int) -> TableEntry | None:
        return self.entries.get(n)

    def merged_with(self, other: "PCritTable") -> "PCritTable":
        """Pointwise best threshold; provenance follows the winning entry."""
        if other.m != self.m:
            raise ValueError("cannot merge tables with different m")
        out = dict(self.entries)
        for n, entry in other.entries.items():
            cur = out.get(n)
            if cur is None or entry.p_crit > cur.p_crit:
                out[n] = entry
        return PCritTable(m=self.m, entries=out)

    @classmethod
    def from_family(cls, n_max: int) -> "PCritTable":
        """Even-n thresholds from the closed-form family (m=2).

        Uses the closed form directly; the identity behind it is validated
        separately (exactly, for n up to 200) by the family module's tests.
        """
        entries = {
            n: TableEntry(p_crit=pcrit_family(n, validate=False), source="family")
            for n in range(2, n_max + 1, 2)
        }
        return cls(m=2, entries=entries)

    @classmethod
    def from_values(cls, m: int, values: Mapping[int, Scalar], source: str = "lp") -> "PCritTable":
        return cls(
            m=m, entries={n: TableEntry(p_crit=v, source=source) for n, v in values.items()}
        )


@dataclass(frozen=True)
class PersistencyBound:
    """Per-N bounds; ``witness`` records the (n, p_crit) pair behind the lower bound.

    ``partial`` marks lower bounds computed from an incomplete table: some
    larger removal count could not be tested, so the true optimum of the scan
    may be higher (the reported value is still a valid lower bound).
    """

    N: int
    m: int
    lower: int
    upper: int | None
    witness: tuple[int, Scalar] | None
    partial: bool = False
    missing: tuple[int, ...] = field(default_factory=tuple)


def lower_bound(
    N: int, m: int, table: PCritTable, *, allow_partial: bool = False
) -> PersistencyBound:
    """Largest k with p_crit(N-k) > k/N gives the lower bound k + 1.

    Scans k downward from N-2; entries that fail the comparison are fine, but
    a missing entry above the first success leaves the scan undecided: with
    ``allow_partial`` the bound from available entries is returned and
    flagged, otherwise a :class:`TableGapError` lists the gaps.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    if table.m != m:
        raise ValueError(f"table is for m={table.m}, requested m={m}")
    missing: list[int] = []
    found_k: int | None = None
    witness: tuple[int, Scalar] | None = None
    for k in range(N - 2, -1, -1):
        n = N - k
        entry = table.get(n)
        if entry is None:
            missing.append(n)
            continue
        if _exceeds(entry.p_crit, k, N):
            found_k = k
            witness = (n, entry.p_crit)
            break
    if not allow_partial and missing:
        raise TableGapError(missing)
    lower = 0 if found_k is None else found_k + 1
    upper = upper_bound(N, m) if N >= m else None
    return PersistencyBound(
        N=N,
        m=m,
        lower=lower,
        upper=upper,
        witness=witness,
        partial=bool(missing),
        missing=tuple(sorted(missing)),
    )


def _exceeds(p_crit: Scalar, k: int, N: int) -> bool:
    """p_crit > k/N without float division when the entry is rational."""
    if isinstance(p_crit, Fraction):
        return p_crit * N > k
    return float(p_crit) * N > k


def upper_bound(N: int, m: int) -> int:
    """N - floor(N/m): removals that certainly make the reduced state local.

    Tracing down to the largest multiple of m first is harmless because
    reduced states of permutation-invariant states stay permutation
    invariant, so the grouped-measurement argument applies to floor(N/m)
    groups.
    """
    if m < 2:
        raise ValueError("need m >= 2")
    if N < m:
        raise ValueError(f"upper bound undefined for N={N} < m={m}")
    return N - N // m


def asymptotic_report(
    N_max: int, m: int = 2, table: PCritTable | None = None
) -> list[dict]:
    """(N, lower, upper) rows for even N, defaulting to family-only thresholds.

    With the family table alone the scan only sees even reduced sizes; the
    resulting bounds are certified but may undershoot what an LP-augmented
    table gives at small N.  Ratios approach 2/5 (lower) and equal 1/2 (upper).
    """
    if table is None:
        table = PCritTable.from_family(N_max)
    rows = []
    for N in range(4, N_max + 1, 2):
        bound = lower_bound(N, m, table, allow_partial=True)
        upper = upper_bound(N, m)
        rows.append(
            {
                "N": N,
                "lower": bound.lower,
                "upper": upper,
                "lower_ratio": bound.lower / N,
                "upper_ratio": upper / N,
                "witness_n": bound.witness[0] if bound.witness else None,
            }
        )
    return rows
