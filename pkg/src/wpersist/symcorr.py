"""Permutation-symmetric correlator coordinates and deterministic-strategy images.

A correlation experiment with n parties and m binary observables per party is
summarized, for permutation-invariant states, by one number per multiset of
setting assignments.  A coordinate is indexed by a :class:`SettingProfile`
(how many parties use each setting); its value is the average of the product
correlator over all distinct assignments with those counts, i.e. the
permutation sum divided by n!.  Deterministic local strategies, classified by
:class:`StrategyCounts`, map to such vectors; their images are the vertices of
the symmetrized local polytope.

All vertex arithmetic is exact: strategy images and functional values are
Fractions, with floats appearing only when a caller supplies float-valued
points (e.g. quantum points at generic angles).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Union

import numpy as np

from .errors import CapacityError

Scalar = Union[Fraction, float]

PERMANENT_MAX_N = 14


def sign_vectors(m: int) -> tuple[tuple[int, ...], ...]:
    """All outcome sign-vectors in {+1,-1}^m, lexicographic with +1 first.

    For m=2 the order is (+1,+1), (+1,-1), (-1,+1), (-1,-1), matching the
    conventional four-tuple (a, b, c, d) of strategy multiplicities.
    """
    return tuple(product((1, -1), repeat=m))


@dataclass(frozen=True)
class SettingProfile:
    """Multiset of measurement-setting counts indexing one symmetric coordinate.

    ``counts[j]`` is the number of parties assigned setting j+1; the remaining
    ``r0 = n - sum(counts)`` parties measure the identity.  The order
    ``o = sum(counts)`` is the number of non-trivial factors in the correlator.
    """

    counts: tuple[int, ...]
    n: int

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError(f"negative setting count in {self.counts}")
        if not 0 <= self.o <= self.n:
            raise ValueError(f"order {self.o} outside 0..{self.n}")

    @property
    def m(self) -> int:
        return len(self.counts)

    @property
    def o(self) -> int:
        """Order: number of parties measuring a non-identity observable."""
        return sum(self.counts)

    @property
    def r0(self) -> int:
        """Number of identity slots."""
        return self.n - self.o

    @property
    def r(self) -> int:
        """Count of setting-1 slots (the two-setting label r)."""
        return self.counts[0]


def enumerate_profiles(n: int, m: int) -> list[SettingProfile]:
    """All profiles with 1 <= o <= n in canonical order.

    Canonical order is ascending in o and descending-lexicographic in the
    counts within each o, so for m=2 the sequence runs
    (o=1,r=1), (o=1,r=0); (o=2,r=2), (o=2,r=1), (o=2,r=0); ...
    The total count is C(n+m, m) - 1.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    out: list[SettingProfile] = []
    for o in range(1, n + 1):
        block = sorted(_compositions(o, m), reverse=True)
        out.extend(SettingProfile(counts, n) for counts in block)
    return out


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    """Non-negative integer vectors of given length summing to total."""
    if parts == 1:
        return [(total,)]
    out = []
    for first in range(total + 1):
        out.extend((first,) + rest for rest in _compositions(total - first, parts - 1))
    return out


@dataclass(frozen=True)
class StrategyCounts:
    """A deterministic local strategy class: multiplicity per outcome sign-vector.

    ``counts`` is aligned with :func:`sign_vectors`; party permutations leave
    the class invariant, so this is the full symmetric classification.  For
    m=2 the counts are exactly the four-tuple (a, b, c, d) of parties whose
    (setting-1, setting-2) outcomes are (+,+), (+,-), (-,+), (-,-).
    """

    m: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != 2 ** self.m:
            raise ValueError(f"expected {2 ** self.m} multiplicities, got {len(self.counts)}")
        if any(c < 0 for c in self.counts):
            raise ValueError("negative multiplicity")

    @property
    def n(self) -> int:
        return sum(self.counts)

    @classmethod
    def from_abcd(cls, a: int, b: int, c: int, d: int) -> "StrategyCounts":
        return cls(m=2, counts=(a, b, c, d))

    @property
    def abcd(self) -> tuple[int, int, int, int]:
        if self.m != 2:
            raise ValueError("abcd labels only exist for m=2")
        return self.counts  # type: ignore[return-value]

    def items(self):
        """(sign_vector, multiplicity) pairs with positive multiplicity."""
        vecs = sign_vectors(self.m)
        return [(vecs[i], t) for i, t in enumerate(self.counts) if t > 0]


@dataclass(frozen=True)
class SymVector:
    """Normalized permutation-symmetric correlator vector.

    Entries map each profile with o >= 1 to the per-assignment average value;
    the implicit o=0 coordinate equals 1.  Entries of strategy images are
    exact Fractions in [-1, 1]; quantum points at generic angles are floats.
    """

    n: int
    m: int
    entries: Mapping[SettingProfile, Scalar]

    def value(self, profile: SettingProfile) -> Scalar:
        if profile.o == 0:
            return Fraction(1)
        return self.entries[profile]

    def is_exact(self) -> bool:
        return all(isinstance(v, (Fraction, int)) for v in self.entries.values())

    def to_array(self, profiles: list[SettingProfile] | None = None) -> np.ndarray:
        order = profiles if profiles is not None else enumerate_profiles(self.n, self.m)
        return np.array([float(self.entries[p]) for p in order], dtype=float)

    def to_json_dict(self) -> dict:
        out = []
        for p in enumerate_profiles(self.n, self.m):
            num, den = _as_ratio(self.entries[p])
            out.append({"profile": list(p.counts), "num": num, "den": den})
        return {"n": self.n, "m": self.m, "entries": out}

    @classmethod
    def from_json_dict(cls, data: dict) -> "SymVector":
        n, m = data["n"], data["m"]
        entries = {
            SettingProfile(tuple(e["profile"]), n): Fraction(e["num"], e["den"])
            for e in data["entries"]
        }
        return cls(n=n, m=m, entries=entries)


def _as_ratio(value: Scalar) -> tuple[int, int]:
    """Lossless numerator/denominator encoding (dyadic for floats)."""
    if isinstance(value, Fraction):
        return value.numerator, value.denominator
    if isinstance(value, int):
        return value, 1
    num, den = float(value).as_integer_ratio()
    return num, den


@dataclass(frozen=True)
class BellFunctional:
    """Coefficient vector over symmetric coordinates plus a local bound.

    ``alpha`` maps profiles to exact rational coefficients (absent = 0);
    ``beta_c`` is the maximum of the functional over deterministic strategies,
    on the un-normalized scale (i.e. including the n! factor).
    """

    n: int
    m: int
    alpha: Mapping[SettingProfile, Fraction]
    beta_c: Fraction | None = None

    def to_json_dict(self) -> dict:
        alpha = []
        for p in sorted(self.alpha, key=lambda q: (q.o, tuple(-c for c in q.counts))):
            num, den = _as_ratio(self.alpha[p])
            alpha.append({"profile": list(p.counts), "num": num, "den": den})
        out: dict = {"n": self.n, "m": self.m, "alpha": alpha}
        if self.beta_c is not None:
            out["beta_num"] = self.beta_c.numerator
            out["beta_den"] = self.beta_c.denominator
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "BellFunctional":
        n = data["n"]
        alpha = {
            SettingProfile(tuple(e["profile"]), n): Fraction(e["num"], e["den"])
            for e in data["alpha"]
        }
        beta = None
        if "beta_num" in data:
            beta = Fraction(data["beta_num"], data["beta_den"])
        return cls(n=n, m=data["m"], alpha=alpha, beta_c=beta)


def apply_functional(func: BellFunctional, point: SymVector) -> Scalar:
    """Value of the Bell expression on a point, on the un-normalized scale.

    Stored coordinates are permutation averages, so the raw expression value
    is n! * sum(alpha * s); the n! factor is restored here exactly.
    """
    if (func.n, func.m) != (point.n, point.m):
        raise ValueError(
            f"functional is for (n={func.n}, m={func.m}), point for (n={point.n}, m={point.m})"
        )
    total: Scalar = Fraction(0)
    for profile, coeff in func.alpha.items():
        total += coeff * point.value(profile)
    return math.factorial(func.n) * total


# ---------------------------------------------------------------------------
# Strategy images via generating functions.
#
# For a strategy with multiplicity t_v per sign-vector v, the sum of product
# correlators over distinct assignments is the coefficient of
# prod_j x_j^{r_j} in prod_v (1 + sum_j x_j v_j)^{t_v}; the normalized entry
# multiplies by r0! * prod_j r_j! / n!.  Expansion is iterated integer
# convolution, never symbolic algebra.
# ---------------------------------------------------------------------------


def _linear_power(vec: tuple[int, ...], t: int) -> dict[tuple[int, ...], int]:
    """Integer coefficients of (1 + sum_j x_j vec_j)^t by multinomial expansion."""
    m = len(vec)
    out: dict[tuple[int, ...], int] = {}
    for i in range(t + 1):
        choose = math.comb(t, i)
        for k in _compositions(i, m):
            coeff = choose * _multinomial(i, k)
            for vj, kj in zip(vec, k):
                if kj and vj < 0:
                    if kj % 2:
                        coeff = -coeff
            out[k] = out.get(k, 0) + coeff
    return out


def _multinomial(total: int, parts: tuple[int, ...]) -> int:
    out = 1
    rest = total
    for p in parts:
        out *= math.comb(rest, p)
        rest -= p
    return out


def _poly_mul(
    p: dict[tuple[int, ...], int], q: dict[tuple[int, ...], int]
) -> dict[tuple[int, ...], int]:
    out: dict[tuple[int, ...], int] = {}
    for ka, ca in p.items():
        for kb, cb in q.items():
            key = tuple(x + y for x, y in zip(ka, kb))
            out[key] = out.get(key, 0) + ca * cb
    return out


def strategy_polynomial(strategy: StrategyCounts) -> dict[tuple[int, ...], int]:
    """Generating polynomial of a strategy class (integer coefficients)."""
    poly: dict[tuple[int, ...], int] = {(0,) * strategy.m: 1}
    for vec, t in strategy.items():
        poly = _poly_mul(poly, _linear_power(vec, t))
    return poly


def vertex_image(strategy: StrategyCounts, n: int, m: int | None = None) -> SymVector:
    """Exact normalized symmetric image of a deterministic strategy class."""
    if m is None:
        m = strategy.m
    if strategy.m != m:
        raise ValueError(f"strategy has m={strategy.m}, requested m={m}")
    if strategy.n != n:
        raise ValueError(f"strategy has n={strategy.n}, requested n={n}")
    poly = strategy_polynomial(strategy)
    nfact = math.factorial(n)
    entries: dict[SettingProfile, Scalar] = {}
    for profile in enumerate_profiles(n, m):
        coeff = poly.get(profile.counts, 0)
        weight = math.factorial(profile.r0)
        for rj in profile.counts:
            weight *= math.factorial(rj)
        entries[profile] = Fraction(coeff * weight, nfact)
    return SymVector(n=n, m=m, entries=entries)


# ---------------------------------------------------------------------------
# Permanent-based oracle (m=2 only).
# ---------------------------------------------------------------------------


def strategy_matrix(strategy: StrategyCounts, profile: SettingProfile) -> np.ndarray:
    """The +-1 matrix whose permanent equals the raw symmetric sum S^o_r.

    Rows are correlator slots (r0 identity rows, then r setting-1 rows, then
    o-r setting-2 rows); columns are parties grouped as a|b|c|d.  An entry is
    that party's outcome for the row's setting (identity rows are all +1).
    """
    if strategy.m != 2:
        raise ValueError("the permanent construction is specific to m=2")
    a, b, c, d = strategy.abcd
    n = strategy.n
    if profile.n != n:
        raise ValueError("profile/strategy size mismatch")
    o, r = profile.o, profile.r
    mat = np.ones((n, n), dtype=np.int64)
    # setting-1 rows: -1 for parties of the (-,+) and (-,-) types
    mat[n - o : n - o + r, a + b :] = -1
    # setting-2 rows: -1 for parties of the (+,-) and (-,-) types
    mat[n - o + r :, a : a + b] = -1
    mat[n - o + r :, a + b + c :] = -1
    return mat


def permanent(mat: np.ndarray) -> int:
    """Permanent of an integer matrix by subset inclusion-exclusion, exact.

    Cost 2^n * n; all row sums stay below 2^63 for the +-1 matrices used here
    (n <= 14), so int64 vectorization is exact.
    """
    n = mat.shape[0]
    if mat.shape != (n, n):
        raise ValueError("square matrix required")
    if n == 0:
        return 1
    subsets = np.arange(1, 2 ** n, dtype=np.int64)
    members = ((subsets[:, None] >> np.arange(n)) & 1).astype(np.int64)
    rowsums = members @ mat.T.astype(np.int64)
    prods = np.prod(rowsums, axis=1)
    sizes = members.sum(axis=1)
    signs = np.where((n - sizes) % 2 == 0, 1, -1)
    return int(np.dot(signs, prods))


def vertex_image_permanent(
    strategy: StrategyCounts, profile: SettingProfile, n: int
) -> Fraction:
    """Normalized coordinate of a strategy image via the permanent oracle."""
    if strategy.m != 2:
        raise ValueError("permanent oracle is m=2 only")
    if strategy.n != n:
        raise ValueError(f"strategy has n={strategy.n}, requested n={n}")
    if n > PERMANENT_MAX_N:
        raise CapacityError(
            f"permanent evaluation needs 2^n work; n={n} exceeds the n<={PERMANENT_MAX_N} cap",
            requested=n,
            cap=PERMANENT_MAX_N,
        )
    return Fraction(permanent(strategy_matrix(strategy, profile)), math.factorial(n))


def s_o1_closed_form(abcd: tuple[int, int, int, int], o: int, n: int) -> Fraction:
    """Closed-form normalized coordinate at r=1 for a two-setting strategy.

    Row-expansion of the slot matrix gives, for the profile with a single
    setting-1 slot, an alternating-binomial form in (a, c) and (a+2b+c-n);
    each bracket's prefactor vanishes exactly when its binomials would need a
    negative upper index, so those terms are skipped.
    """
    a, b, c, d = abcd
    if a + b + c + d != n:
        raise ValueError("strategy multiplicities must sum to n")
    if not 1 <= o <= n:
        raise ValueError(f"order {o} outside 1..{n}")
    total = 0
    lead = a - c
    if lead != 0:
        total += lead * sum(
            (-1) ** k * math.comb(n - a - c, k) * _comb0(a + c - 1, o - 1 - k)
            for k in range(0, n - a - c + 1)
        )
    lead = a + 2 * b + c - n
    if lead != 0:
        total += lead * sum(
            (-1) ** k * math.comb(n - a - c - 1, k) * _comb0(a + c, o - 1 - k)
            for k in range(0, n - a - c)
        )
    raw = math.factorial(o - 1) * math.factorial(n - o) * total
    return Fraction(raw, math.factorial(n))


def _comb0(nn: int, kk: int) -> int:
    if kk < 0 or kk > nn:
        return 0
    return math.comb(nn, kk)
