"""An explicit two-setting Bell-inequality family for even party counts.

The family assigns rational coefficients to three strips of symmetric
coordinates (even orders at r=0, odd orders at r=1, plus the (o=2, r=2)
coordinate) and carries a closed-form local bound.  Its value on the
W/vacuum mixture at Z, X settings crosses the bound at vacuum weight
(2n-4)/(5n-2), which is the certified noise threshold the rest of the
package builds on.

Everything here is exact rational arithmetic; the local bound and threshold
are certified values, so no float path is permitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .quantum import MeasurementAngles, NoisyWState, mixed_point
from .symcorr import (
    BellFunctional,
    SettingProfile,
    StrategyCounts,
    apply_functional,
    vertex_image,
)

ENUMERATION_MAX_N = 20


def _require_even(n: int) -> None:
    if n < 2 or n % 2:
        raise ValueError(f"the family is defined for even n >= 2, got {n}")


@dataclass(frozen=True)
class FamilyConstants:
    """The rational ingredients of the family's coefficients for one n."""

    n: int
    F: tuple[Fraction, ...]
    G: tuple[Fraction, ...]
    w: Fraction

    @classmethod
    def for_n(cls, n: int) -> "FamilyConstants":
        _require_even(n)
        half = n // 2
        w = Fraction(n * (n - 1) * (n + 2)) * Fraction(2) ** (n - 4) / math.comb(n, half)
        F = tuple(
            Fraction((-1) ** k * (n + 1 - 2 * k) * math.comb(half, k) * (n - 2), 2)
            for k in range(1, half + 1)
        )
        G = tuple(
            Fraction((-1) ** k * n * math.comb(half - 1, k - 1) * (n + 2), 2)
            for k in range(1, half + 1)
        )
        return cls(n=n, F=F, G=G, w=w)


def family_coefficients(n: int) -> BellFunctional:
    """The functional for even n, with its exact local bound attached.

    Nonzero coefficients: alpha[o=2k, r=0] = F_k, alpha[o=2k-1, r=1] = G_k
    (plus 2w at k=1), alpha[o=2, r=2] = -w.  n=2 is accepted but degenerate:
    the bound is never violated and the threshold formula gives 0.
    """
    consts = FamilyConstants.for_n(n)
    alpha: dict[SettingProfile, Fraction] = {}
    for k in range(1, n // 2 + 1):
        o = 2 * k
        alpha[_profile(n, o, 0)] = consts.F[k - 1]
        o = 2 * k - 1
        coeff = consts.G[k - 1] + (2 * consts.w if k == 1 else 0)
        alpha[_profile(n, o, 1)] = coeff
    key22 = _profile(n, 2, 2)
    alpha[key22] = alpha.get(key22, Fraction(0)) - consts.w
    alpha = {p: c for p, c in alpha.items() if c != 0}
    beta = local_bound_formula(n)
    return BellFunctional(n=n, m=2, alpha=alpha, beta_c=beta)


def _profile(n: int, o: int, r: int) -> SettingProfile:
    return SettingProfile(counts=(r, o - r), n=n)


def local_bound_formula(n: int) -> Fraction:
    """Closed-form maximum over deterministic strategies: n!(w - (n-2)(n+1)/2)."""
    _require_even(n)
    w = FamilyConstants.for_n(n).w
    return math.factorial(n) * (w - Fraction((n - 2) * (n + 1), 2))


def _f1(n: int, bd: int) -> int:
    """Case selector on how far 2(b+d) sits from n (0, +-2, or farther)."""
    gap = abs(2 * bd - n)
    if gap == 0:
        return 2
    if gap == 2:
        return 1
    return 0


def _f2(a: int, b: int, c: int, d: int) -> int:
    """Signed correction paired with _f1; nonzero on the same three cases."""
    lhs, rhs = a + c, b + d
    if lhs == rhs:
        return a + b - c - d
    if lhs == rhs + 2:
        return a - c
    if lhs == rhs - 2:
        return b - d
    return 0


def family_classical_value(strategy: tuple[int, int, int, int], n: int) -> Fraction:
    """Family value on the deterministic strategy (a, b, c, d), closed form.

    The three coefficient strips collapse, after regrouping, into a single
    expression whose only strategy dependence is c+d and a narrow case split
    x = 2((n/2-1) f1 - f2); this must (and does, by test) agree with applying
    the functional to the strategy's vertex image.
    """
    _require_even(n)
    a, b, c, d = strategy
    if min(a, b, c, d) < 0 or a + b + c + d != n:
        raise ValueError(f"invalid strategy tuple {strategy} for n={n}")
    half = n // 2
    x = 2 * ((half - 1) * _f1(n, b + d) - _f2(a, b, c, d))
    lead = Fraction(math.factorial(half) ** 2) * 2 ** (n - 2) * (half + 1)
    value = lead * x
    value += lead * (half * (n - 1) + 2 * (c + d) * (1 - c - d))
    value -= (half - 1) * math.factorial(n + 1)
    return value


def family_local_bound_enumerate(n: int) -> tuple[Fraction, tuple[int, int, int, int]]:
    """Exact maximum of the family over all strategy classes, with one argmax.

    Enumerates all C(n+3, 3) four-tuples; ties resolve to the lexicographically
    largest tuple so the all-(+,+) strategy (n,0,0,0) is reported at its bound.
    """
    _require_even(n)
    if n > ENUMERATION_MAX_N:
        raise ValueError(f"enumeration capped at n <= {ENUMERATION_MAX_N}")
    best: Fraction | None = None
    arg = None
    for a in range(n, -1, -1):
        for b in range(n - a, -1, -1):
            for c in range(n - a - b, -1, -1):
                d = n - a - b - c
                val = family_classical_value((a, b, c, d), n)
                if best is None or val > best:
                    best, arg = val, (a, b, c, d)
    assert best is not None and arg is not None
    return best, arg


def family_vertex_value(strategy: tuple[int, int, int, int], n: int) -> Fraction:
    """Family value via the generating-function vertex image (independent route)."""
    func = family_coefficients(n)
    image = vertex_image(StrategyCounts.from_abcd(*strategy), n)
    value = apply_functional(func, image)
    assert isinstance(value, Fraction)
    return value


def quantum_pair(n: int) -> tuple[Fraction, Fraction]:
    """(value on the pure W point, value on the vacuum point) at Z, X settings.

    Closed forms: n!(w - (n-2)(n-1)/2) and n!(w - n(n+2)/2).
    """
    _require_even(n)
    w = FamilyConstants.for_n(n).w
    nfact = math.factorial(n)
    on_w = nfact * (w - Fraction((n - 2) * (n - 1), 2))
    on_vacuum = nfact * (w - Fraction(n * (n + 2), 2))
    return on_w, on_vacuum


def family_quantum_value(n: int, p: Fraction | int) -> Fraction:
    """Family value on the W/vacuum mixture at Z, X settings, exact in p."""
    _require_even(n)
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"vacuum weight {p} outside [0, 1]")
    on_w, on_vacuum = quantum_pair(n)
    return (1 - p) * on_w + p * on_vacuum


def family_quantum_value_via_point(n: int, p: Fraction) -> Fraction:
    """Same value, but through the generic correlator pipeline (cross-check)."""
    func = family_coefficients(n)
    point = mixed_point(NoisyWState(n=n, p=Fraction(p)), MeasurementAngles.zx())
    value = apply_functional(func, point)
    assert isinstance(value, Fraction)
    return value


def pcrit_family(n: int, validate: bool = True) -> Fraction:
    """Critical vacuum weight of the family at Z, X settings: (2n-4)/(5n-2).

    With ``validate`` the value is recomputed from the bound and the two
    quantum values and must agree identically; n=2 is accepted and yields 0
    (the degenerate, violation-free case).
    """
    _require_even(n)
    closed = Fraction(2 * n - 4, 5 * n - 2)
    if validate:
        beta = local_bound_formula(n)
        on_w, on_vacuum = quantum_pair(n)
        from_parts = Fraction(beta - on_w, on_vacuum - on_w)
        if from_parts != closed:
            raise AssertionError(
                f"threshold identity failed at n={n}: {from_parts} != {closed}"
            )
    return closed
