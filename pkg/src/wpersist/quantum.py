"""Correlator points of W/vacuum mixtures under identical coplanar measurements.

Every party measures the same observable cos(theta_j) Z + sin(theta_j) X for
setting j; the state is (1-p)|W_n><W_n| + p|0...0><0...0|.  The one-excitation
structure of the W state gives closed forms for every symmetric coordinate,
validated against a dense statevector oracle.  When every angle is a multiple
of pi/2 the trigonometric values are snapped to exact integers and the closed
forms return exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapacityError
from .symcorr import Scalar, SettingProfile, SymVector, enumerate_profiles

DENSE_ORACLE_MAX_N = 12

_SNAP_TOL = 1e-12


@dataclass(frozen=True)
class MeasurementAngles:
    """Coplanar measurement directions, one angle per setting.

    Setting j measures cos(theta_j) Z + sin(theta_j) X, a +-1-valued
    observable on the X-Z plane; the same settings are used by every party.
    """

    angles: tuple[float, ...]

    def __post_init__(self):
        if len(self.angles) < 1:
            raise ValueError("need at least one setting")

    @property
    def m(self) -> int:
        return len(self.angles)

    @classmethod
    def zx(cls) -> "MeasurementAngles":
        """The Z, X pair (theta = 0 and pi/2)."""
        return cls(angles=(0.0, math.pi / 2))


@dataclass(frozen=True)
class NoisyWState:
    """(1-p)|W_n><W_n| + p|0^n><0^n|; p is the vacuum weight.

    Tracing k parties out of an N-party W state yields this family with
    n = N - k and p = k/N.
    """

    n: int
    p: Scalar

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need n >= 1")
        if not 0 <= self.p <= 1:
            raise ValueError(f"vacuum weight {self.p} outside [0, 1]")

    @classmethod
    def from_particle_loss(cls, N: int, k: int) -> "NoisyWState":
        if not 0 <= k < N:
            raise ValueError("need 0 <= k < N")
        return cls(n=N - k, p=Fraction(k, N))


def _trig(angle: float) -> tuple[Scalar, Scalar]:
    """(cos, sin) with values snapped to exact -1, 0, +1 near multiples of pi/2."""
    c: Scalar = math.cos(angle)
    s: Scalar = math.sin(angle)
    for target in (-1, 0, 1):
        if abs(c - target) < _SNAP_TOL:
            c = Fraction(target)
        if abs(s - target) < _SNAP_TOL:
            s = Fraction(target)
    return c, s


def _trig_tables(angles: MeasurementAngles, n: int):
    """Per-setting powers of cos plus sin values; exact when angles snap."""
    cos, sin = [], []
    for a in angles.angles:
        c, s = _trig(a)
        cos.append(c)
        sin.append(s)
    # cospow[j][t] = cos(theta_j)^t, built multiplicatively so exact zeros stay exact
    cospow = []
    for c in cos:
        row: list[Scalar] = [Fraction(1)]
        for _ in range(n):
            row.append(row[-1] * c)
        cospow.append(row)
    return cos, sin, cospow


def w_point(n: int, angles: MeasurementAngles) -> SymVector:
    """Symmetric correlator vector of the n-party W state.

    The W state has a single excitation, so each correlator splits into a
    diagonal part (excitation sits at one of the measured-or-idle slots) and
    an exchange part (amplitude hops between two measured slots):

        s = [ (n-2o) * P + sum_j r_j(r_j-1) sin^2(t_j) * P_jj
              + sum_{j!=k} r_j r_k sin(t_j) sin(t_k) * P_jk ] / n

    where P is the product of cos(t_j)^{r_j} and P_jj, P_jk omit two cosine
    factors; the omitted-factor products are assembled multiplicatively so
    zero cosines never require division.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    m = angles.m
    _, sin, cospow = _trig_tables(angles, n)
    entries: dict[SettingProfile, Scalar] = {}
    for profile in enumerate_profiles(n, m):
        r = profile.counts
        o = profile.o
        full = Fraction(1)
        for j in range(m):
            full = full * cospow[j][r[j]]
        total = (n - 2 * o) * full
        for j in range(m):
            if r[j] >= 2 and sin[j] != 0:
                omit = Fraction(1)
                for k in range(m):
                    omit = omit * cospow[k][r[k] - 2 if k == j else r[k]]
                total += r[j] * (r[j] - 1) * sin[j] * sin[j] * omit
        for j in range(m):
            for k in range(m):
                if j == k or r[j] == 0 or r[k] == 0:
                    continue
                if sin[j] == 0 or sin[k] == 0:
                    continue
                omit = Fraction(1)
                for l in range(m):
                    drop = (1 if l == j else 0) + (1 if l == k else 0)
                    omit = omit * cospow[l][r[l] - drop]
                total += r[j] * r[k] * sin[j] * sin[k] * omit
        if isinstance(total, (int, Fraction)):
            entries[profile] = Fraction(total, n)
        else:
            entries[profile] = total / n
    return SymVector(n=n, m=m, entries=entries)


def product_point(n: int, angles: MeasurementAngles) -> SymVector:
    """Symmetric correlator vector of the all-zeros product state.

    Each qubit contributes <0|O(theta)|0> = cos(theta), so a profile's value
    is the product of cos(theta_j)^{r_j}.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    m = angles.m
    _, _, cospow = _trig_tables(angles, n)
    entries: dict[SettingProfile, Scalar] = {}
    for profile in enumerate_profiles(n, m):
        val: Scalar = Fraction(1)
        for j in range(m):
            val = val * cospow[j][profile.counts[j]]
        entries[profile] = val
    return SymVector(n=n, m=m, entries=entries)


def mixed_point(state: NoisyWState, angles: MeasurementAngles) -> SymVector:
    """Correlators of the W/vacuum mixture: (1-p) * w_point + p * product_point."""
    w = w_point(state.n, angles)
    q = product_point(state.n, angles)
    p = state.p
    entries = {
        profile: (1 - p) * w.entries[profile] + p * q.entries[profile]
        for profile in w.entries
    }
    return SymVector(n=state.n, m=angles.m, entries=entries)


# ---------------------------------------------------------------------------
# Dense statevector oracle (test-only path).
# ---------------------------------------------------------------------------


def w_statevector(n: int) -> np.ndarray:
    """|W_n> as a dense real vector: equal weight on all single-excitation states."""
    if n < 1:
        raise ValueError("need n >= 1")
    vec = np.zeros(2 ** n)
    for i in range(n):
        vec[1 << i] = 1.0
    return vec / math.sqrt(n)


def observable_matrix(angle: float) -> np.ndarray:
    """cos(theta) Z + sin(theta) X as a dense 2x2 real matrix."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s], [s, -c]])


def dense_oracle(state: NoisyWState, angles: MeasurementAngles, profile: SettingProfile) -> float:
    """Correlator from the full 2^n density operator; used only to validate closed forms.

    Builds rho and the tensor-product observable for one representative
    assignment (the first r_1 parties use setting 1, and so on; symmetry of
    the state makes the choice irrelevant) and returns the trace.
    """
    n = state.n
    if n > DENSE_ORACLE_MAX_N:
        raise CapacityError(
            f"dense oracle holds a 2^n x 2^n operator; n={n} exceeds n<={DENSE_ORACLE_MAX_N}",
            requested=n,
            cap=DENSE_ORACLE_MAX_N,
        )
    if profile.n != n or len(profile.counts) != angles.m:
        raise ValueError("profile does not match state/settings")
    w = w_statevector(n)
    rho = (1.0 - float(state.p)) * np.outer(w, w)
    rho[0, 0] += float(state.p)

    single = [observable_matrix(a) for a in angles.angles]
    per_party: list[np.ndarray] = []
    for j, rj in enumerate(profile.counts):
        per_party.extend([single[j]] * rj)
    per_party.extend([np.eye(2)] * profile.r0)
    obs = np.array([[1.0]])
    for mat in per_party:
        obs = np.kron(obs, mat)
    return float(np.sum(rho * obs.T))
