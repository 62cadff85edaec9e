"""LP membership on the symmetrized local polytope and heuristic angle search.

The local polytope for n exchangeable parties with m binary settings is the
convex hull of strategy-class images (one column per :class:`StrategyCounts`).
Given the quantum pair (P1, P0) = (W-state point, vacuum point) at fixed
angles, the critical vacuum weight is found by the LP

    minimize p   s.t.   V lambda + (P1 - P0) p = P1,  sum(lambda) = 1,
                        lambda >= 0,  0 <= p <= 1.

The equality duals of the solved LP give a separating hyperplane; its
coefficients are rationalized and re-certified in exact arithmetic (exact
maximum over all vertex classes, exact line crossing when the quantum points
are rational), so every reported threshold is backed by a checkable facet
certificate rather than solver output alone.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import CapacityError
from .quantum import MeasurementAngles, _trig
from .symcorr import (
    BellFunctional,
    SettingProfile,
    StrategyCounts,
    SymVector,
    enumerate_profiles,
    sign_vectors,
)

DEFAULT_VERTEX_CAP = 5_000_000
DEFAULT_TABLE_BYTES = 1_500_000_000

# grid points per angle on [0, pi); coarser for many settings where each LP is big
DEFAULT_GRID = {2: 24, 3: 12, 4: 4, 5: 4, 6: 3}

_RATIONALIZE_LADDER = (10 ** 4, 10 ** 6, 10 ** 9, 0)  # 0 = exact float ratio


def class_count(n: int, m: int) -> int:
    """Number of strategy classes: weak compositions of n over 2^m sign-vectors."""
    t = 2 ** m
    return math.comb(n + t - 1, t - 1)


class VertexTable:
    """All strategy-class images for one (n, m), as an exact integer matrix.

    Row v holds the numerators of class v's image over n! (int64 is exact up
    to n = 20).  Images are built in one shared-prefix sweep: a depth-first
    walk over per-type multiplicities multiplies the running generating
    polynomial (a dense integer array over the exponent grid) by one linear
    factor per added party, so common prefixes are expanded once.
    """

    def __init__(self, n: int, m: int, strategies: list[StrategyCounts], numerators: np.ndarray):
        self.n = n
        self.m = m
        self.strategies = strategies
        self.profiles = enumerate_profiles(n, m)
        self.numerators = numerators
        self.denominator = math.factorial(n)
        self._float: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.strategies)

    @property
    def float_matrix(self) -> np.ndarray:
        if self._float is None:
            self._float = self.numerators.astype(float) / float(self.denominator)
        return self._float

    def image(self, idx: int) -> SymVector:
        row = self.numerators[idx]
        entries = {
            p: Fraction(int(row[i]), self.denominator) for i, p in enumerate(self.profiles)
        }
        return SymVector(n=self.n, m=self.m, entries=entries)

    def exact_max(self, alpha: Sequence[Fraction]) -> tuple[Fraction, int]:
        """Exact maximum of sum(alpha * s) over all rows, with an argmax index.

        A float pass with a rigorous dot-product error bound keeps only the
        rows that can possibly attain the maximum; those are re-evaluated in
        exact integer arithmetic.
        """
        if len(alpha) != len(self.profiles):
            raise ValueError("coefficient length mismatch")
        af = np.array([float(x) for x in alpha])
        scores = self.numerators.astype(float) @ af
        abs_scores = np.abs(self.numerators.astype(float)) @ np.abs(af)
        err = (len(af) * 1.2e-16) * abs_scores + 1e-300
        cutoff = np.max(scores - err)
        candidates = np.nonzero(scores + err >= cutoff)[0]

        lcm = 1
        for x in alpha:
            lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
        nums = [int(x * lcm) for x in alpha]
        best_num: int | None = None
        best_idx = -1
        for idx in candidates:
            row = self.numerators[idx]
            total = sum(a * int(row[i]) for i, a in enumerate(nums) if a)
            if best_num is None or total > best_num:
                best_num, best_idx = total, int(idx)
        assert best_num is not None
        return Fraction(best_num, lcm * self.denominator), best_idx


@lru_cache(maxsize=16)
def _cached_table(n: int, m: int, vertex_cap: int, byte_cap: int) -> VertexTable:
    return _build_table(n, m, vertex_cap, byte_cap)


def get_vertex_table(
    n: int,
    m: int,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
    byte_cap: int = DEFAULT_TABLE_BYTES,
) -> VertexTable:
    return _cached_table(n, m, vertex_cap, byte_cap)


def _build_table(n: int, m: int, vertex_cap: int, byte_cap: int) -> VertexTable:
    count = class_count(n, m)
    if count > vertex_cap:
        raise CapacityError(
            f"{count} strategy classes for (n={n}, m={m}) exceed the cap of {vertex_cap}",
            requested=count,
            cap=vertex_cap,
        )
    profiles = enumerate_profiles(n, m)
    need = 2 * count * len(profiles) * 8
    if need > byte_cap:
        raise CapacityError(
            f"vertex table for (n={n}, m={m}) needs ~{need} bytes, over the {byte_cap} cap",
            requested=need,
            cap=byte_cap,
        )
    vecs = sign_vectors(m)
    dims = (n + 1,) * m
    flat_idx = np.array(
        [np.ravel_multi_index(p.counts, dims) for p in profiles], dtype=np.intp
    )
    weights = np.array(
        [
            math.factorial(p.r0) * math.prod(math.factorial(rj) for rj in p.counts)
            for p in profiles
        ],
        dtype=np.int64,
    )

    strategies: list[StrategyCounts] = []
    rows: list[np.ndarray] = []
    counts_stack: list[int] = []

    def mul_linear(arr: np.ndarray, vec: tuple[int, ...]) -> np.ndarray:
        out = arr.copy()
        for j, vj in enumerate(vec):
            src = [slice(None)] * m
            dst = [slice(None)] * m
            src[j] = slice(0, n)
            dst[j] = slice(1, n + 1)
            if vj > 0:
                out[tuple(dst)] += arr[tuple(src)]
            else:
                out[tuple(dst)] -= arr[tuple(src)]
        return out

    def emit(poly: np.ndarray) -> None:
        coeffs = poly.reshape(-1)[flat_idx]
        rows.append(coeffs * weights)
        strategies.append(StrategyCounts(m=m, counts=tuple(counts_stack)))

    def walk(type_idx: int, remaining: int, poly: np.ndarray) -> None:
        if type_idx == len(vecs) - 1:
            cur = poly
            for _ in range(remaining):
                cur = mul_linear(cur, vecs[type_idx])
            counts_stack.append(remaining)
            emit(cur)
            counts_stack.pop()
            return
        cur = poly
        for t in range(remaining + 1):
            if t > 0:
                cur = mul_linear(cur, vecs[type_idx])
            counts_stack.append(t)
            walk(type_idx + 1, remaining - t, cur)
            counts_stack.pop()

    root = np.zeros(dims, dtype=np.int64)
    root.reshape(-1)[0] = 1
    walk(0, n, root)
    return VertexTable(n=n, m=m, strategies=strategies, numerators=np.vstack(rows))


def build_vertices(
    n: int, m: int, vertex_cap: int = DEFAULT_VERTEX_CAP
) -> list[tuple[StrategyCounts, SymVector]]:
    """One (strategy class, exact image) pair per symmetric vertex."""
    table = get_vertex_table(n, m, vertex_cap=vertex_cap)
    return [(table.strategies[i], table.image(i)) for i in range(len(table))]


# ---------------------------------------------------------------------------
# Certificates.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PCritCertificate:
    """A critical-noise value plus the facet evidence behind it.

    ``p_crit`` is the LP boundary crossing (accurate to solver precision,
    typically 1e-12).  The facet stores rationalized separating-hyperplane
    coefficients with an exactly recomputed local bound; its own crossing
    (``p_cert`` when the quantum points are rational, e.g. Z, X settings) is
    a rigorously certified threshold and sits within certification tolerance
    of p_crit.  ``facet is None`` records a local point (p_crit = 0).
    """

    n: int
    m: int
    p_crit: float
    angles: tuple[float, ...]
    facet: BellFunctional | None
    p_cert: Fraction | None  # exact crossing of the certified facet (rational points only)
    verified: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def certified_threshold(self) -> float:
        """The facet-backed threshold: nonlocality is proven for all p below it."""
        if self.p_cert is not None:
            return float(self.p_cert)
        return float(self.witnesses.get("certified_crossing", self.p_crit))

    def to_json_dict(self) -> dict:
        facet = self.facet.to_json_dict() if self.facet is not None else None
        if facet is not None:
            facet = {
                "alpha": facet["alpha"],
                "beta_num": facet["beta_num"],
                "beta_den": facet["beta_den"],
            }
        return {
            "n": self.n,
            "m": self.m,
            "p_crit": self.p_crit,
            "angles": list(self.angles),
            "facet": facet,
            "verified": self.verified,
            "witnesses": {k: self.witnesses[k] for k in sorted(self.witnesses)},
        }


@dataclass(frozen=True)
class VerifyReport:
    passed: bool
    checks: dict
    message: str = ""


@dataclass(frozen=True)
class SearchConfig:
    """Deterministic knobs for the angle search."""

    grid: int | None = None
    refine_tol: float = 1e-6
    restarts: int = 3
    seed: int = 0
    vertex_cap: int = DEFAULT_VERTEX_CAP
    byte_cap: int = DEFAULT_TABLE_BYTES
    max_lp_evals: int = 2000
    pool_rounds: int = 12
    refine_mode: str | None = None  # "lp" | "pool" | None = auto
    tie_tol: float = 1e-9


# ---------------------------------------------------------------------------
# Quantum point arrays (fast float path used by the search loops).
# ---------------------------------------------------------------------------


def point_arrays(
    n: int, angles: Sequence[float], profiles: list[SettingProfile]
) -> tuple[np.ndarray, np.ndarray]:
    """(W-state point, vacuum point) as float arrays in profile order."""
    m = len(angles)
    cos = [float(_trig(a)[0]) for a in angles]
    sin = [float(_trig(a)[1]) for a in angles]
    cospow = [[c ** t for t in range(n + 1)] for c in cos]
    p1 = np.empty(len(profiles))
    p0 = np.empty(len(profiles))
    for i, prof in enumerate(profiles):
        r = prof.counts
        o = prof.o
        full = 1.0
        for j in range(m):
            full *= cospow[j][r[j]]
        total = (n - 2 * o) * full
        for j in range(m):
            if r[j] >= 2 and sin[j] != 0.0:
                omit = 1.0
                for k in range(m):
                    omit *= cospow[k][r[k] - 2 if k == j else r[k]]
                total += r[j] * (r[j] - 1) * sin[j] * sin[j] * omit
        for j in range(m):
            for k in range(m):
                if j == k or r[j] == 0 or r[k] == 0 or sin[j] == 0.0 or sin[k] == 0.0:
                    continue
                omit = 1.0
                for l in range(m):
                    drop = (1 if l == j else 0) + (1 if l == k else 0)
                    omit *= cospow[l][r[l] - drop]
                total += r[j] * r[k] * sin[j] * sin[k] * omit
        p1[i] = total / n
        p0[i] = full
    return p1, p0


def _sym_vector_array(point: SymVector, profiles: list[SettingProfile]) -> np.ndarray:
    return np.array([float(point.entries[p]) for p in profiles])


# ---------------------------------------------------------------------------
# The membership LP.
# ---------------------------------------------------------------------------


@dataclass
class _LPSolution:
    status: int
    p: float
    duals: np.ndarray | None  # equality duals, coordinate rows then normalization row
    nit: int
    residual: float
    message: str = ""


COLGEN_THRESHOLD = 8000


class _LPWorkspace:
    """Repeated membership solves on one vertex table.

    Small tables keep the full constraint matrix resident.  Large tables use
    column generation: a restricted master over an active column set (plus
    penalized slack columns that keep it feasible) is solved, then every class
    is priced against the duals in one matrix-vector product and violating
    columns join the active set.  At termination the duals are feasible for
    every class, so the restricted optimum is the full optimum.  The active
    set persists across calls, which makes sweeps over nearby angles cheap.
    """

    def __init__(self, table: VertexTable, colgen: bool | None = None):
        self.table = table
        self._lock = threading.Lock()
        self.colgen = (len(table) > COLGEN_THRESHOLD) if colgen is None else colgen
        if not self.colgen:
            nrows = len(table.profiles) + 1
            ncols = len(table) + 1
            self.a_eq = np.empty((nrows, ncols))
            self.a_eq[:-1, :-1] = table.float_matrix.T
            self.a_eq[-1, :-1] = 1.0
            self.a_eq[-1, -1] = 0.0
            self.cost = np.zeros(ncols)
            self.cost[-1] = 1.0
            self.bounds = [(0, None)] * (ncols - 1) + [(0, 1)]
        else:
            self.active = self._seed_columns()
            self.support: np.ndarray = self.active[:0]
            self.last_duals: np.ndarray | None = None

    def _seed_columns(self) -> np.ndarray:
        count = len(self.table)
        pure = [
            i
            for i, s in enumerate(self.table.strategies)
            if max(s.counts) == self.table.n
        ]
        stride = max(1, count // 1024)
        seeded = set(pure) | set(range(0, count, stride))
        return np.array(sorted(seeded), dtype=np.intp)

    def solve(self, p1: np.ndarray, p0: np.ndarray) -> _LPSolution:
        # the workspace scratch (last column, active set) is mutated per solve;
        # concurrent callers share the read-only table but serialize here
        with self._lock:
            return self._solve_locked(p1, p0)

    def _solve_locked(self, p1: np.ndarray, p0: np.ndarray) -> _LPSolution:
        if self.colgen:
            return self._solve_colgen(p1, p0)
        self.a_eq[:-1, -1] = p1 - p0
        b_eq = np.concatenate([p1, [1.0]])
        res = linprog(
            self.cost, A_eq=self.a_eq, b_eq=b_eq, bounds=self.bounds, method="highs"
        )
        if res.status != 0:
            return _LPSolution(res.status, math.nan, None, int(getattr(res, "nit", -1)),
                               math.inf, res.message)
        residual = float(np.max(np.abs(self.a_eq @ res.x - b_eq)))
        return _LPSolution(
            0, float(res.x[-1]), np.asarray(res.eqlin.marginals, dtype=float),
            int(getattr(res, "nit", -1)), residual,
        )

    def _prune_active(self, cap: int = 2500) -> None:
        """Bound the master size; keep the last support plus best-priced columns."""
        if len(self.active) <= cap:
            return
        keep = set(self.support.tolist())
        keep.update(
            i for i, s in enumerate(self.table.strategies) if max(s.counts) == self.table.n
        )
        if self.last_duals is not None:
            scores = self.table.float_matrix @ self.last_duals[:-1]
            order = np.argsort(scores[self.active])[::-1]
            for idx in self.active[order]:
                if len(keep) >= cap:
                    break
                keep.add(int(idx))
        self.active = np.array(sorted(keep), dtype=np.intp)

    def _solve_colgen(
        self, p1: np.ndarray, p0: np.ndarray, penalty: float = 1e4, max_iter: int = 80
    ) -> _LPSolution:
        vf = self.table.float_matrix
        nd = vf.shape[1]
        b_eq = np.concatenate([p1, [1.0]])
        nit_total = 0
        self._prune_active()
        for it in range(max_iter):
            act = self.active
            k = len(act)
            ncols = k + 1 + 2 * (nd + 1)  # active columns, p, +/- slacks per row
            a_eq = np.empty((nd + 1, ncols))
            a_eq[:-1, :k] = vf[act].T
            a_eq[-1, :k] = 1.0
            a_eq[:-1, k] = p1 - p0
            a_eq[-1, k] = 0.0
            a_eq[:, k + 1 : k + 1 + nd + 1] = np.eye(nd + 1)
            a_eq[:, k + 1 + nd + 1 :] = -np.eye(nd + 1)
            cost = np.zeros(ncols)
            cost[k] = 1.0
            cost[k + 1 :] = penalty
            bounds = [(0, None)] * k + [(0, 1)] + [(0, None)] * (2 * (nd + 1))
            res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
            if res.status != 0:
                return _LPSolution(res.status, math.nan, None, nit_total, math.inf, res.message)
            nit_total += int(getattr(res, "nit", 0))
            duals = np.asarray(res.eqlin.marginals, dtype=float)
            # price every class: a column improves if its reduced cost is negative
            scores = vf @ duals[:-1] + duals[-1]
            tol = 1e-9 * (1.0 + float(np.max(np.abs(duals))))
            violating = np.nonzero(scores > tol)[0]
            violating = np.setdiff1d(violating, act, assume_unique=False)
            slack_mass = float(np.sum(res.x[k + 1 :]))
            # heavy dual degeneracy can keep producing epsilon-violating
            # columns forever; past round 30 accept a looser dual tolerance
            # (the exact certification pass re-validates the facet anyway)
            if it >= 30:
                tol = max(tol, 1e-6 * (1.0 + float(np.max(np.abs(duals)))))
                violating = violating[scores[violating] > tol]
            if len(violating) == 0:
                if slack_mass > 1e-7:
                    if penalty < 1e8:
                        return self._solve_colgen(p1, p0, penalty=penalty * 100)
                    return _LPSolution(1, math.nan, None, nit_total, math.inf,
                                       "column generation stalled with slack mass")
                residual = float(np.max(np.abs(a_eq @ res.x - b_eq)))
                self.support = act[res.x[:k] > 1e-10]
                self.last_duals = duals
                return _LPSolution(0, float(res.x[k]), duals, nit_total, residual)
            take = violating[np.argsort(scores[violating])[::-1][:500]]
            self.active = np.union1d(act, take)
        return _LPSolution(1, math.nan, None, nit_total, math.inf,
                           "column generation iteration cap reached")


@lru_cache(maxsize=16)
def _cached_workspace(n: int, m: int, vertex_cap: int, byte_cap: int) -> _LPWorkspace:
    return _LPWorkspace(_cached_table(n, m, vertex_cap, byte_cap))


def _resolve_table(vertices, n: int, m: int, config: SearchConfig | None = None) -> VertexTable:
    if isinstance(vertices, VertexTable):
        return vertices
    if vertices is None:
        cfg = config or SearchConfig()
        return get_vertex_table(n, m, cfg.vertex_cap, cfg.byte_cap)
    # a build_vertices-style list: reassemble the integer matrix
    strategies = [s for s, _ in vertices]
    profiles = enumerate_profiles(n, m)
    den = math.factorial(n)
    rows = np.array(
        [[int(img.entries[p] * den) for p in profiles] for _, img in vertices],
        dtype=np.int64,
    )
    return VertexTable(n=n, m=m, strategies=strategies, numerators=rows)


def pcrit_lp(
    P1: SymVector,
    P0: SymVector,
    vertices=None,
    *,
    angles: Sequence[float] | None = None,
    config: SearchConfig | None = None,
    cert_tol: float = 5e-6,
) -> PCritCertificate:
    """Minimal vacuum weight p at which (1-p) P1 + p P0 becomes local.

    Solves the membership LP, reads the pierced facet off the equality duals,
    rationalizes it, and re-certifies: the local bound is recomputed as the
    exact maximum over every vertex class, and the reported p_crit is the
    certified crossing of that facet.  Returns a null-facet certificate with
    p_crit = 0 when P1 itself is local.
    """
    if (P1.n, P1.m) != (P0.n, P0.m):
        raise ValueError("P1 and P0 must share (n, m)")
    n, m = P1.n, P1.m
    cfg = config or SearchConfig()
    table = _resolve_table(vertices, n, m, cfg)
    ws = _LPWorkspace(table) if vertices is not None else _cached_workspace(
        n, m, cfg.vertex_cap, cfg.byte_cap
    )
    profiles = table.profiles
    p1 = _sym_vector_array(P1, profiles)
    p0 = _sym_vector_array(P0, profiles)
    sol = ws.solve(p1, p0)
    if sol.status not in (0, 2) and ws.colgen:
        # pricing can stall on heavily degenerate points; one dense solve settles it
        sol = _LPWorkspace(table, colgen=False).solve(p1, p0)
    if sol.status == 2:
        raise RuntimeError(
            "membership LP infeasible even with free p: the vertex table is broken"
        )
    if sol.status != 0:
        raise RuntimeError(f"LP solver did not converge (status {sol.status}): {sol.message}")
    p_lp = sol.p
    witnesses = {
        "lp_p": p_lp,
        "lp_iterations": sol.nit,
        "lp_residual": sol.residual,
    }

    if p_lp <= 1e-9:
        return PCritCertificate(
            n=n, m=m, p_crit=0.0,
            angles=tuple(angles) if angles is not None else (),
            facet=None, p_cert=None, verified=True, witnesses=witnesses,
        )

    assert sol.duals is not None
    alpha_f = sol.duals[:-1]
    # the p column is basic at an interior optimum, so alpha . (P1 - P0) = 1
    orient = float(alpha_f @ (p1 - p0))
    if orient < 0:
        alpha_f = -alpha_f
        orient = -orient
    if abs(orient) > 1e-12:
        alpha_f = alpha_f / orient
    witnesses["dual_orientation"] = orient

    cert = _certify_facet(
        table, alpha_f, P1, P0, p1, p0, p_lp, cert_tol=cert_tol
    )
    facet, p_cert, p_float, verified, extra = cert
    witnesses.update(extra)
    witnesses["certified_crossing"] = p_float
    return PCritCertificate(
        n=n, m=m,
        p_crit=p_lp,
        angles=tuple(angles) if angles is not None else (),
        facet=facet,
        p_cert=p_cert,
        verified=verified,
        witnesses=witnesses,
    )


def _certify_facet(
    table: VertexTable,
    alpha_f: np.ndarray,
    P1: SymVector,
    P0: SymVector,
    p1: np.ndarray,
    p0: np.ndarray,
    p_lp: float,
    cert_tol: float,
):
    """Rationalize LP duals and certify exactly; escalate precision as needed."""
    profiles = table.profiles
    scale = float(np.max(np.abs(alpha_f)))
    if scale == 0.0:
        return None, None, p_lp, False, {"certify": "zero dual vector"}
    exact_points = P1.is_exact() and P0.is_exact()
    last = None
    for den_cap in _RATIONALIZE_LADDER:
        alpha = []
        for x in alpha_f:
            x = float(x)
            if abs(x) < 1e-12 * scale:
                alpha.append(Fraction(0))
            elif den_cap:
                alpha.append(Fraction(x).limit_denominator(den_cap))
            else:
                alpha.append(Fraction(*x.as_integer_ratio()))
        beta, argmax = table.exact_max(alpha)
        if exact_points:
            a_on_p1 = sum(a * P1.entries[p] for a, p in zip(alpha, profiles) if a)
            a_on_p0 = sum(a * P0.entries[p] for a, p in zip(alpha, profiles) if a)
            if a_on_p1 <= beta:
                last = (None, None, p_lp, False, {"certify": "no exact violation"})
                continue
            p_cert = Fraction(a_on_p1 - beta, a_on_p1 - a_on_p0)
            p_float = float(p_cert)
        else:
            af = np.array([float(a) for a in alpha])
            a_on_p1 = float(af @ p1)
            a_on_p0 = float(af @ p0)
            if a_on_p1 <= float(beta):
                last = (None, None, p_lp, False, {"certify": "no violation"})
                continue
            p_cert = None
            p_float = (a_on_p1 - float(beta)) / (a_on_p1 - a_on_p0)
        if abs(p_float - p_lp) <= cert_tol:
            func = BellFunctional(
                n=table.n,
                m=table.m,
                alpha={p: a for p, a in zip(profiles, alpha) if a},
                beta_c=beta * table.denominator,
            )
            extra = {
                "certify_denominator_cap": den_cap,
                "bound_argmax": list(table.strategies[argmax].counts),
            }
            return func, p_cert, p_float, True, extra
        last = (None, None, p_lp, False, {"certify": f"crossing drift {p_float - p_lp:.2e}"})
    assert last is not None
    return last


def verify_certificate(cert: PCritCertificate, vertices=None) -> VerifyReport:
    """Exact a-posteriori check of a certificate against the full vertex set.

    Confirms (i) the stored local bound is exactly the maximum over every
    strategy class, (ii) the facet is violated by the quantum point at p
    slightly below p_crit, and (iii) the certified crossing matches p_crit.
    A null facet is valid only for p_crit = 0.
    """
    if cert.facet is None:
        ok = cert.p_crit == 0.0
        return VerifyReport(
            passed=ok,
            checks={"null_facet": ok},
            message="local point" if ok else "null facet with nonzero p_crit",
        )
    table = _resolve_table(vertices, cert.n, cert.m)
    profiles = table.profiles
    alpha = [cert.facet.alpha.get(p, Fraction(0)) for p in profiles]
    checks: dict = {}
    beta_norm, _ = table.exact_max(alpha)
    beta_stored = Fraction(cert.facet.beta_c, table.denominator)
    checks["beta_is_vertex_max"] = beta_norm == beta_stored

    if cert.angles:
        p1, p0 = point_arrays(cert.n, cert.angles, profiles)
        af = np.array([float(a) for a in alpha])
        a1, a0 = float(af @ p1), float(af @ p0)
        margin = a1 - float(beta_stored)
        checks["violates_at_p0"] = margin > 1e-9
        probe = cert.p_crit - 1e-6
        if probe > 0:
            val = (1 - probe) * a1 + probe * a0
            checks["violates_below_pcrit"] = val > float(beta_stored)
        if a1 > a0:
            crossing = (a1 - float(beta_stored)) / (a1 - a0)
            checks["crossing_matches"] = abs(crossing - cert.p_crit) <= 1e-5
        else:
            checks["crossing_matches"] = False
    if cert.p_cert is not None:
        checks["exact_crossing_matches"] = abs(float(cert.p_cert) - cert.p_crit) <= 1e-5

    passed = all(checks.values())
    return VerifyReport(passed=passed, checks=checks, message="" if passed else str(checks))


def is_local_point(point: SymVector, table: VertexTable, tol: float = 1e-9) -> bool:
    """Feasibility probe: is the point a convex mix of vertex images?"""
    profiles = table.profiles
    target = _sym_vector_array(point, profiles)
    ncols = len(table)
    a_eq = np.empty((len(profiles) + 1, ncols))
    a_eq[:-1] = table.float_matrix.T
    a_eq[-1] = 1.0
    b_eq = np.concatenate([target, [1.0]])
    res = linprog(
        np.zeros(ncols),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(0, None)] * ncols,
        method="highs",
    )
    return res.status == 0


# ---------------------------------------------------------------------------
# Angle search.
# ---------------------------------------------------------------------------


def _grid_values(g: int) -> list[float]:
    return [k * math.pi / g for k in range(g)]


def _grid_candidates(m: int, g: int) -> list[tuple[float, ...]]:
    """Sorted-multiset grid: permuting settings is an exact symmetry."""
    return [tuple(c) for c in combinations_with_replacement(_grid_values(g), m)]


def _structured_candidates(m: int) -> list[tuple[float, ...]]:
    """A few spread-out starts that coarse grids can miss."""
    out = [tuple(k * math.pi / m for k in range(m))]
    out.append(tuple((k + 0.5) * math.pi / m for k in range(m)))
    if m >= 2:
        out.append(tuple([0.0, math.pi / 2] + [(k + 1) * math.pi / (m + 1) for k in range(m - 2)]))
    return [tuple(sorted(a % math.pi for a in cand)) for cand in out]


class _AngleEvaluator:
    """p_crit as a function of angles, with an LP call budget and facet pool.

    Angle vectors with repeated entries are solved in the reduced scenario on
    their distinct angles: settings with equal angles produce identical
    correlators, so the threshold is unchanged while the LP shrinks from the
    m-setting polytope (where such points are maximally degenerate) to the
    m'-setting one.
    """

    def __init__(self, n: int, m: int, ws: _LPWorkspace, config: SearchConfig):
        self.n = n
        self.m = m
        self.ws = ws
        self.config = config
        self.profiles = ws.table.profiles
        self.lp_calls = 0
        self.budget_exhausted = False
        self.pool: list[tuple[np.ndarray, float]] = []
        self._reduced_memo: dict[tuple[float, ...], float] = {}

    def lp_value(self, angles: tuple[float, ...]) -> float:
        if self.lp_calls >= self.config.max_lp_evals:
            # budget exhausted: report "no improvement" so the search winds
            # down on its incumbent instead of aborting (best-so-far contract)
            self.budget_exhausted = True
            return -1.0
        reduced = tuple(sorted(set(angles)))
        if len(reduced) < self.m:
            return self._reduced_value(reduced)
        self.lp_calls += 1
        p1, p0 = point_arrays(self.n, angles, self.profiles)
        sol = self.ws.solve(p1, p0)
        if sol.status != 0 or sol.duals is None:
            return -1.0
        p = sol.p
        marg = sol.duals[:-1].copy()
        orient = float(marg @ (p1 - p0))
        if orient < 0:
            marg, orient = -marg, -orient
        if p > 1e-9 and orient > 1e-12:
            alpha = marg / orient
            scores = self.ws.table.float_matrix @ alpha
            self.pool.append((alpha, float(np.max(scores))))
            if len(self.pool) > 40:
                self.pool.pop(0)
        return p

    def _reduced_value(self, reduced: tuple[float, ...]) -> float:
        if reduced in self._reduced_memo:
            return self._reduced_memo[reduced]
        self.lp_calls += 1
        ws = _cached_workspace(
            self.n, len(reduced), self.config.vertex_cap, self.config.byte_cap
        )
        p1, p0 = point_arrays(self.n, reduced, ws.table.profiles)
        sol = ws.solve(p1, p0)
        value = sol.p if sol.status == 0 else -1.0
        self._reduced_memo[reduced] = value
        return value

    def pool_value(self, angles: tuple[float, ...]) -> float:
        if not self.pool:
            return 0.0
        p1, p0 = point_arrays(self.n, angles, self.profiles)
        best = 0.0
        for alpha, beta in self.pool:
            a1 = float(alpha @ p1)
            if a1 <= beta:
                continue
            a0 = float(alpha @ p0)
            p = (a1 - beta) / (a1 - a0)
            if p > best:
                best = min(p, 1.0)
        return best


def _split_duplicates(angles: Sequence[float], delta: float) -> tuple[float, ...]:
    """Nudge repeated angles apart (k-th duplicate moves by k*delta, mod pi)."""
    seen: dict[float, int] = {}
    out = []
    for a in angles:
        k = seen.get(a, 0)
        seen[a] = k + 1
        out.append((a + k * delta) % math.pi)
    return tuple(out)


def _pattern_search(eval_fn, start, start_value, step0, tol, max_steps=100000):
    theta = list(start)
    best = start_value
    step = step0
    m = len(theta)
    steps = 0
    while step > tol and steps < max_steps:
        improved = False
        for j in range(m):
            for sgn in (1.0, -1.0):
                cand = theta.copy()
                cand[j] = (cand[j] + sgn * step) % math.pi
                steps += 1
                val = eval_fn(tuple(cand))
                if val > best + 1e-12:
                    theta, best = cand, val
                    improved = True
        if not improved:
            step /= 2
    return tuple(theta), best


def optimize_angles(
    n: int, m: int, config: SearchConfig | None = None, *, use_cache: bool = True
) -> PCritCertificate:
    """Best certificate found by a deterministic grid-plus-refinement search.

    The grid covers sorted angle multisets on [0, pi) (setting permutations
    are exact symmetries) and always contains the Z, X pair when the grid is
    even.  Refinement is pattern search; for small tables every probe solves
    the LP, for large ones probes are priced against a pool of facets already
    seen and the LP is re-solved only at the pool optimizer (alternation).
    The search is heuristic but the returned certificate is exactly verified.

    Results are memoized per (n, m, config): the search is deterministic, so
    repeated queries (threshold tables, report generators) reuse one run.
    """
    cfg = config or SearchConfig()
    if use_cache:
        return _optimize_cached(n, m, cfg)
    return _optimize_angles(n, m, cfg)


@lru_cache(maxsize=128)
def _optimize_cached(n: int, m: int, cfg: SearchConfig) -> PCritCertificate:
    return _optimize_angles(n, m, cfg)


def _optimize_angles(n: int, m: int, cfg: SearchConfig) -> PCritCertificate:
    g = cfg.grid if cfg.grid is not None else DEFAULT_GRID.get(m, 4)
    ws = _cached_workspace(n, m, cfg.vertex_cap, cfg.byte_cap)
    ev = _AngleEvaluator(n, m, ws, cfg)

    candidates = _grid_candidates(m, g) + _structured_candidates(m)
    scored: list[tuple[float, tuple[float, ...]]] = []
    best_p = -1.0
    best_angles = candidates[0]
    for angles in candidates:
        p = ev.lp_value(angles)
        scored.append((p, angles))
        if p > best_p + cfg.tie_tol:
            best_p, best_angles = p, angles

    mode = cfg.refine_mode
    if mode is None:
        # LP-per-probe refinement only where single solves are cheap; facet-pool
        # alternation (cheap probes, LP at accepted moves) everywhere else
        mode = "lp" if len(ws.table) <= 1200 else "pool"

    starts = sorted(scored, key=lambda t: (-t[0], t[1]))[: max(1, cfg.restarts)]
    step0 = math.pi / g
    for p_start, angles in starts:
        if mode == "lp":
            theta, p = _pattern_search(ev.lp_value, angles, p_start, step0, cfg.refine_tol)
        else:
            # pool alternation needs full-space facets; split any duplicated
            # start coordinates so each round solves a non-degenerate LP
            theta = _split_duplicates(angles, step0 / 8)
            p = ev.lp_value(theta)
            if p < p_start:
                theta, p = angles, p_start
            for _ in range(cfg.pool_rounds):
                probe, _ = _pattern_search(
                    ev.pool_value, theta, ev.pool_value(theta), step0, cfg.refine_tol / 10
                )
                p_new = ev.lp_value(probe)
                if p_new > p + 1e-9:
                    theta, p = probe, p_new
                else:
                    break
        if p > best_p + cfg.tie_tol:
            best_p, best_angles = p, theta

    if mode == "pool":
        # bounded LP polish from the incumbent: pool pricing can stall just
        # short of a strict threshold that a few direct probes clear
        budget = 80 if not ws.colgen else 24
        theta, p = _pattern_search(
            ev.lp_value, best_angles, best_p, step0 / 2, cfg.refine_tol, max_steps=budget
        )
        if p > best_p + cfg.tie_tol:
            best_p, best_angles = p, theta

    reduced = tuple(sorted(set(best_angles)))
    if len(reduced) < m:
        # the incumbent uses fewer distinct settings than allowed; certify it
        # in its own reduced scenario (the certificate is valid a fortiori)
        cert = pcrit_at_angles(n, len(reduced), reduced, config=cfg)
        cert.witnesses["requested_m"] = m
        cert.witnesses["degenerate_angles"] = list(best_angles)
    else:
        P1, P0 = _exactable_points(n, best_angles)
        cert = pcrit_lp(P1, P0, angles=best_angles, config=cfg)
    cert.witnesses["lp_evals"] = ev.lp_calls
    cert.witnesses["grid"] = g
    cert.witnesses["refine_mode"] = mode
    if ev.budget_exhausted:
        cert.witnesses["lp_budget_exhausted"] = True
    return cert


def _exactable_points(n: int, angles: Sequence[float]) -> tuple[SymVector, SymVector]:
    from .quantum import product_point, w_point

    ma = MeasurementAngles(angles=tuple(angles))
    return w_point(n, ma), product_point(n, ma)


def pcrit_at_angles(
    n: int, m: int, angles: Sequence[float], config: SearchConfig | None = None
) -> PCritCertificate:
    """Certificate for one fixed angle vector (exact pipeline at special angles)."""
    if len(angles) != m:
        raise ValueError(f"expected {m} angles, got {len(angles)}")
    P1, P0 = _exactable_points(n, angles)
    return pcrit_lp(P1, P0, angles=tuple(angles), config=config)
