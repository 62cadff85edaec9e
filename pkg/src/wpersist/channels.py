"""Amplitude damping on dense n-qubit states, and its action on W states.

Losing an excitation with probability p in each mode is the amplitude-damping
channel with Kraus operators K0 = diag(1, sqrt(1-p)) and K1 = sqrt(p)|0><1|,
applied independently per qubit.  On a W state the 2^n Kraus branches
collapse to three sectors: the all-K0 branch rescales the W state by (1-p),
each single-K1 branch contributes (p/n) of vacuum, and branches with two or
more K1 factors annihilate the single excitation.  The result is exactly the
W/vacuum mixture, which is what lets excitation loss reuse the particle-loss
thresholds.  This module is a dense numerical oracle for that identity, not a
performance path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .quantum import w_statevector

DENSE_CHANNEL_MAX_N = 10


@dataclass(frozen=True)
class KrausPair:
    """The two single-qubit amplitude-damping operators for loss probability p."""

    p: float

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError(f"loss probability {self.p} outside [0, 1]")

    @property
    def k0(self) -> np.ndarray:
        return np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - self.p)]])

    @property
    def k1(self) -> np.ndarray:
        return np.array([[0.0, math.sqrt(self.p)], [0.0, 0.0]])

    def completeness_defect(self) -> float:
        """Max-norm deviation of K0'K0 + K1'K1 from the identity."""
        total = self.k0.T @ self.k0 + self.k1.T @ self.k1
        return float(np.max(np.abs(total - np.eye(2))))


def w_density(n: int) -> np.ndarray:
    w = w_statevector(n)
    return np.outer(w, w)


def vacuum_density(n: int) -> np.ndarray:
    rho = np.zeros((2 ** n, 2 ** n))
    rho[0, 0] = 1.0
    return rho


def _check_density(rho: np.ndarray, dim: int) -> None:
    if rho.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} density matrix, got {rho.shape}")
    if abs(float(np.trace(rho)) - 1.0) > 1e-12:
        raise ValueError(f"input trace {float(np.trace(rho))} is not 1")


def _qubit_count(rho: np.ndarray) -> int:
    n = int(round(math.log2(rho.shape[0])))
    if 2 ** n != rho.shape[0]:
        raise ValueError(f"dimension {rho.shape[0]} is not a power of two")
    return n


def amplitude_damp(rho: np.ndarray, p: float) -> np.ndarray:
    """Apply per-qubit amplitude damping to a dense density operator.

    Qubits are processed sequentially (rho -> K0 rho K0' + K1 rho K1' on each
    wire), which expands to the same sum over all 2^n Kraus index vectors.
    """
    n = _qubit_count(rho)
    if n > DENSE_CHANNEL_MAX_N:
        raise CapacityError(
            f"dense channel holds 2^n x 2^n matrices; n={n} exceeds n<={DENSE_CHANNEL_MAX_N}",
            requested=n,
            cap=DENSE_CHANNEL_MAX_N,
        )
    _check_density(rho, 2 ** n)
    kraus = KrausPair(p=p)
    out = np.array(rho, dtype=float)
    for qubit in range(n):
        k0 = _lift(kraus.k0, qubit, n)
        k1 = _lift(kraus.k1, qubit, n)
        out = k0 @ out @ k0.T + k1 @ out @ k1.T
    return out


def _lift(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    full = np.array([[1.0]])
    for pos in range(n):
        full = np.kron(full, op if pos == qubit else np.eye(2))
    return full


def kraus_branch(rho: np.ndarray, pattern: tuple[int, ...], p: float) -> np.ndarray:
    """One term K_pattern rho K_pattern' of the operator sum (pattern of 0/1)."""
    n = _qubit_count(rho)
    kraus = KrausPair(p=p)
    op = np.array([[1.0]])
    for bit in pattern:
        op = np.kron(op, kraus.k1 if bit else kraus.k0)
    return op @ rho @ op.T


@dataclass(frozen=True)
class DampingReport:
    n: int
    p: float
    passed: bool
    max_deviation: float
    sector_deviations: dict

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "passed": self.passed,
            "max_deviation": self.max_deviation,
            "sector_deviations": {k: self.sector_deviations[k] for k in sorted(self.sector_deviations)},
        }


def verify_w_damping_identity(n: int, p: float, tol: float = 1e-12) -> DampingReport:
    """Check that a damped W state equals the W/vacuum mixture, sector by sector.

    Verifies the three branch identities (all-K0 branch = (1-p) rho_W, each
    single-K1 branch = (p/n) vacuum, any double-K1 branch = 0) and the summed
    channel output against (1-p) rho_W + p vacuum, in max norm.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if n > DENSE_CHANNEL_MAX_N:
        raise CapacityError(
            f"dense check needs 2^n x 2^n matrices; n={n} exceeds n<={DENSE_CHANNEL_MAX_N}",
            requested=n,
            cap=DENSE_CHANNEL_MAX_N,
        )
    rho_w = w_density(n)
    vac = vacuum_density(n)
    devs: dict[str, float] = {}

    all_zero = kraus_branch(rho_w, (0,) * n, p)
    devs["all_k0"] = float(np.max(np.abs(all_zero - (1.0 - p) * rho_w)))

    worst_single = 0.0
    for pos in range(n):
        pattern = tuple(1 if i == pos else 0 for i in range(n))
        branch = kraus_branch(rho_w, pattern, p)
        worst_single = max(worst_single, float(np.max(np.abs(branch - (p / n) * vac))))
    devs["single_k1"] = worst_single

    if n >= 2:
        pattern = (1, 1) + (0,) * (n - 2)
        devs["double_k1"] = float(np.max(np.abs(kraus_branch(rho_w, pattern, p))))
    else:
        devs["double_k1"] = 0.0

    damped = amplitude_damp(rho_w, p)
    expected = (1.0 - p) * rho_w + p * vac
    devs["channel_identity"] = float(np.max(np.abs(damped - expected)))

    worst = max(devs.values())
    return DampingReport(
        n=n, p=p, passed=worst <= tol, max_deviation=worst, sector_deviations=devs
    )
