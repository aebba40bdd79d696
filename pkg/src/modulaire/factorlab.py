"""Truncated infinite tensor products of 2x2 matrices.

A chain state is ``v_1 (x) v_2 (x) ...`` where each ``v_k`` is a 2x2 matrix
viewed as a vector of ``M_2`` with the Hilbert-Schmidt inner product. Only a
finite prefix is arbitrary; every later site carries the tail matrix
``k(lambda_i)``. Inner products and expectation values factor site by site,
so everything here is linear in the truncation length and nothing larger
than a stack of 2x2 matrices is ever built.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, PreconditionError
from .linalg import DEFAULT_TOL, Tolerances, as_matrix

DEFAULT_WINDOW = 50
DEFAULT_TAU_CHAIN = 1e-12


def k_matrix(lam: float) -> np.ndarray:
    """``(1 + lam)^{-1/2} diag(1, sqrt(lam))``; unit HS norm for every ``lam``."""
    lam = float(lam)
    if not (0.0 < lam <= 1.0):
        raise PreconditionError(f"lambda must lie in (0, 1], got {lam}", invariant="lambda range")
    return np.diag([1.0, math.sqrt(lam)]).astype(complex) / math.sqrt(1.0 + lam)


def k_overlap(lam: float, mu: float) -> float:
    """``Tr[k(lam)^dagger k(mu)]`` in closed form."""
    return (1.0 + math.sqrt(lam * mu)) / math.sqrt((1.0 + lam) * (1.0 + mu))


class TailKind(str, enum.Enum):
    IDENTITY_NORMALIZED = "identity_normalized"
    LAMBDA_SEQUENCE = "lambda_sequence"


@dataclass(frozen=True)
class TailRule:
    """Rule producing ``lambda_i`` for tail sites ``i = 1, 2, ...``.

    ``rule`` is one of ``constant``, ``convergent``, ``alternating``,
    ``to_zero``, ``explicit``. ``overrides`` replaces finitely many terms.
    """

    kind: TailKind = TailKind.IDENTITY_NORMALIZED
    rule: str = "constant"
    params: Mapping[str, float] = field(default_factory=dict)
    values: Optional[Tuple[float, ...]] = None
    overrides: Mapping[int, float] = field(default_factory=dict)

    @classmethod
    def identity(cls) -> "TailRule":
        return cls()

    @classmethod
    def constant(cls, lam: float) -> "TailRule":
        return cls(kind=TailKind.LAMBDA_SEQUENCE, rule="constant", params={"lambda": lam})

    @classmethod
    def convergent(cls, lam: float, start: float, rate: float = 0.5) -> "TailRule":
        """``lam + (start - lam) * rate^(i-1)``."""
        return cls(
            kind=TailKind.LAMBDA_SEQUENCE,
            rule="convergent",
            params={"lambda": lam, "start": start, "rate": rate},
        )

    @classmethod
    def alternating(cls, lam: float, lam_tilde: float) -> "TailRule":
        return cls(
            kind=TailKind.LAMBDA_SEQUENCE,
            rule="alternating",
            params={"lambda": lam, "lambda_tilde": lam_tilde},
        )

    @classmethod
    def to_zero(cls, scale: float = 1.0, power: float = 1.0, geometric: Optional[float] = None) -> "TailRule":
        """``scale * i^-power``, or ``scale * geometric^(i-1)`` when ``geometric`` is set."""
        params = {"scale": scale, "power": power}
        if geometric is not None:
            params["geometric"] = geometric
        return cls(kind=TailKind.LAMBDA_SEQUENCE, rule="to_zero", params=params)

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "TailRule":
        return cls(kind=TailKind.LAMBDA_SEQUENCE, rule="explicit", values=tuple(float(v) for v in values))

    def with_overrides(self, overrides: Mapping[int, float]) -> "TailRule":
        merged = dict(self.overrides)
        merged.update({int(k): float(v) for k, v in overrides.items()})
        return TailRule(self.kind, self.rule, self.params, self.values, merged)

    @property
    def first_regular_index(self) -> int:
        """First 1-based index past every override."""
        return max(self.overrides, default=0) + 1

    def available(self) -> Optional[int]:
        """Number of terms the rule can produce (None means unbounded)."""
        if self.kind == TailKind.LAMBDA_SEQUENCE and self.rule == "explicit":
            return len(self.values or ())
        return None

    def lambdas(self, start: int, count: int) -> np.ndarray:
        """``lambda_i`` for ``i = start, ..., start + count - 1`` (1-based)."""
        idx = np.arange(start, start + count, dtype=float)
        if self.kind == TailKind.IDENTITY_NORMALIZED:
            out = np.ones(count)
        else:
            p = self.params
            if self.rule == "constant":
                out = np.full(count, float(p["lambda"]))
            elif self.rule == "convergent":
                lam, s0, r = float(p["lambda"]), float(p["start"]), float(p.get("rate", 0.5))
                out = lam + (s0 - lam) * r ** (idx - 1)
            elif self.rule == "alternating":
                out = np.where(idx % 2 == 1, float(p["lambda"]), float(p["lambda_tilde"]))
            elif self.rule == "to_zero":
                scale = float(p.get("scale", 1.0))
                if "geometric" in p:
                    out = scale * float(p["geometric"]) ** (idx - 1)
                else:
                    out = scale * idx ** (-float(p.get("power", 1.0)))
            elif self.rule == "explicit":
                vals = np.asarray(self.values or (), dtype=float)
                if start - 1 + count > len(vals):
                    raise PreconditionError(
                        f"explicit tail has {len(vals)} terms, needed {start - 1 + count}",
                        invariant="insufficient terms",
                    )
                out = vals[start - 1 : start - 1 + count].copy()
            else:
                raise PreconditionError(f"unknown tail rule {self.rule!r}", invariant="tail rule")
        for i, v in self.overrides.items():
            if start <= i < start + count:
                out[i - start] = v
        if np.any(out <= 0) or np.any(out > 1):
            bad = out[(out <= 0) | (out > 1)]
            raise PreconditionError(f"tail produced lambda outside (0, 1]: {bad[:5].tolist()}", invariant="lambda range")
        return out

    def to_json(self) -> dict:
        if self.kind == TailKind.IDENTITY_NORMALIZED:
            return {"kind": self.kind.value, "params": {}}
        params = {"rule": self.rule, **{k: float(v) for k, v in self.params.items()}}
        if self.values is not None:
            params["values"] = list(self.values)
        if self.overrides:
            params["overrides"] = {str(k): v for k, v in sorted(self.overrides.items())}
        return {"kind": self.kind.value, "params": params}

    @classmethod
    def from_json(cls, doc: Mapping) -> "TailRule":
        kind = TailKind(doc.get("kind", "identity_normalized"))
        params = dict(doc.get("params", {}))
        if kind == TailKind.IDENTITY_NORMALIZED:
            return cls()
        rule = params.pop("rule", "constant")
        values = params.pop("values", None)
        overrides = {int(k): float(v) for k, v in params.pop("overrides", {}).items()}
        tail = cls(
            kind=kind,
            rule=rule,
            params={k: float(v) for k, v in params.items()},
            values=tuple(values) if values is not None else None,
            overrides=overrides,
        )
        tail.lambdas(1, 1 if tail.available() is None else max(1, tail.available()))
        return tail


@dataclass(frozen=True)
class TensorChainState:
    prefix: Tuple[np.ndarray, ...]
    tail: TailRule
    truncation_N: int

    def __post_init__(self):
        prefix = tuple(as_matrix(v, "site matrix") for v in self.prefix)
        for v in prefix:
            if v.shape != (2, 2):
                raise DimensionError(f"site matrices must be 2x2, got {v.shape}")
        if len(prefix) > self.truncation_N:
            raise PreconditionError(
                f"prefix length {len(prefix)} exceeds truncation {self.truncation_N}",
                invariant="prefix within truncation",
            )
        object.__setattr__(self, "prefix", prefix)

    def site_matrices(self, n: Optional[int] = None) -> np.ndarray:
        """Stack of the first ``n`` site matrices, shape ``(n, 2, 2)``."""
        n = self.truncation_N if n is None else n
        out = np.empty((n, 2, 2), dtype=complex)
        p = min(len(self.prefix), n)
        if p:
            out[:p] = np.stack(self.prefix[:p])
        if n > p:
            lam = self.tail.lambdas(1, n - p)
            out[p:] = 0
            scale = 1.0 / np.sqrt(1.0 + lam)
            out[p:, 0, 0] = scale
            out[p:, 1, 1] = np.sqrt(lam) * scale
        return out


class ChainConvergence(str, enum.Enum):
    CONVERGED = "converged"
    DIVERGING_TO_ZERO = "diverging_to_zero"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class ChainInner:
    value: complex
    log_abs: float
    convergence: ChainConvergence


def _log_series_verdict(increments: np.ndarray, window: int, tau: float) -> str:
    """Classify a series of per-site log increments (all <= 0 up to rounding).

    ``converged``: the last ``window`` increments are all below ``tau``.
    ``diverging``: the log mass over the last window exceeds ``tau``
    per site and at least half that of the window before it, so the log
    partial sum keeps falling at a linear rate.
    """
    if increments.size == 0:
        return "converged"
    tail = increments[-window:]
    if np.all(np.abs(tail) < tau):
        return "converged"
    head = increments[-2 * window : -window] if increments.size >= 2 * window else increments[: max(1, increments.size // 2)]
    tail_mass = np.abs(tail).sum() / tail.size
    head_mass = np.abs(head).sum() / head.size
    if np.all(tail <= tau) and tail_mass > tau and tail_mass >= 0.5 * head_mass:
        return "diverging"
    return "undetermined"


def chain_inner(
    v: TensorChainState,
    w: TensorChainState,
    window: int = DEFAULT_WINDOW,
    tau_chain: float = DEFAULT_TAU_CHAIN,
) -> ChainInner:
    """Product of per-site ``Tr[v_k^dagger w_k]`` out to the common truncation."""
    if v.truncation_N != w.truncation_N:
        raise PreconditionError(
            f"truncations differ: {v.truncation_N} vs {w.truncation_N}", invariant="common truncation"
        )
    a = v.site_matrices()
    b = w.site_matrices()
    per_site = np.einsum("kij,kij->k", a.conj(), b)
    mags = np.abs(per_site)
    if np.any(mags == 0):
        return ChainInner(value=0j, log_abs=-math.inf, convergence=ChainConvergence.CONVERGED)
    logs = np.log(mags)
    phase = np.exp(1j * np.sum(np.angle(per_site)))
    log_abs = float(np.sum(logs))
    start = max(len(v.prefix), len(w.prefix))
    verdict = _log_series_verdict(logs[start:], window, tau_chain)
    conv = {
        "converged": ChainConvergence.CONVERGED,
        "diverging": ChainConvergence.DIVERGING_TO_ZERO,
        "undetermined": ChainConvergence.UNDETERMINED,
    }[verdict]
    return ChainInner(value=complex(phase * math.exp(log_abs)), log_abs=log_abs, convergence=conv)


class Side(str, enum.Enum):
    LEFT = "left_action"
    RIGHT = "right_action"


@dataclass(frozen=True)
class FiniteSupportOperator:
    """Operator acting as ``factors[k]`` at site ``k`` (0-based) and identity elsewhere.

    Left action sends ``V -> a V``, right action sends ``V -> V b^dagger``.
    """

    factors: Mapping[int, np.ndarray]
    side: Side = Side.LEFT

    def __post_init__(self):
        fac = {}
        for k, m in self.factors.items():
            m = as_matrix(m, "site factor")
            if m.shape != (2, 2):
                raise DimensionError(f"site factors must be 2x2, got {m.shape}")
            if int(k) < 0:
                raise DimensionError(f"site index must be non-negative, got {k}")
            fac[int(k)] = m
        object.__setattr__(self, "factors", fac)

    @property
    def support(self) -> int:
        """One past the largest non-identity site."""
        return max(self.factors, default=-1) + 1

    def __matmul__(self, other: "FiniteSupportOperator") -> "FiniteSupportOperator":
        if self.side != other.side:
            raise ValueError("cannot multiply left and right actions")
        eye = np.eye(2, dtype=complex)
        sites = set(self.factors) | set(other.factors)
        return FiniteSupportOperator(
            {k: self.factors.get(k, eye) @ other.factors.get(k, eye) for k in sites}, self.side
        )


def functional_F(state: TensorChainState, a: FiniteSupportOperator) -> complex:
    """``<Psi| a Psi>`` with ``Psi`` the chain state."""
    if a.support > state.truncation_N:
        raise PreconditionError(
            f"operator support {a.support} exceeds truncation {state.truncation_N}",
            invariant="support within truncation",
        )
    v = state.site_matrices()
    per_site = np.einsum("kij,kij->k", v.conj(), v)
    for k, m in a.factors.items():
        if a.side == Side.LEFT:
            per_site[k] = np.vdot(v[k], m @ v[k])
        else:
            per_site[k] = np.vdot(v[k], v[k] @ m.conj().T)
    return complex(np.prod(per_site))


class TraceVerdict(str, enum.Enum):
    TRACIAL = "tracial"
    NON_TRACIAL = "non_tracial"


@dataclass(frozen=True)
class TraceReport:
    max_deviation: float
    verdict: TraceVerdict
    trials: int
    seed: int
    witness: Optional[Dict[str, float]] = None

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict.value,
            "max_deviation": float(f"{self.max_deviation:.12g}"),
            "trials": self.trials,
            "seed": self.seed,
        }
        if self.witness is not None:
            out["witness"] = {k: float(f"{v:.12g}") for k, v in self.witness.items()}
        return out


def witness_pair(state: TensorChainState, site: Optional[int] = None):
    """``(E12, E21)`` placed at a tail site (the first one by default)."""
    site = len(state.prefix) if site is None else site
    e12 = np.array([[0, 1], [0, 0]], dtype=complex)
    e21 = np.array([[0, 0], [1, 0]], dtype=complex)
    return FiniteSupportOperator({site: e12}), FiniteSupportOperator({site: e21})


def _random_operator(rng: np.random.Generator, n_sites: int, max_sites: int = 3) -> FiniteSupportOperator:
    k = int(rng.integers(1, max_sites + 1))
    sites = rng.choice(n_sites, size=min(k, n_sites), replace=False)
    fac = {}
    for s in sorted(sites.tolist()):
        fac[s] = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / math.sqrt(2)
    return FiniteSupportOperator(fac)


def trace_property_test(
    state: TensorChainState, trials: int, seed: int, tol: Tolerances = DEFAULT_TOL
) -> TraceReport:
    """Largest ``|F(ab) - F(ba)|`` over seeded random finite-support pairs.

    The ``(E12, E21)`` pair at the first tail site is always probed as well.
    """
    if trials < 1:
        raise PreconditionError(f"trials must be >= 1, got {trials}", invariant="trials >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        a = _random_operator(rng, state.truncation_N)
        b = _random_operator(rng, state.truncation_N)
        worst = max(worst, abs(functional_F(state, a @ b) - functional_F(state, b @ a)))
    witness = None
    if len(state.prefix) < state.truncation_N:
        a, b = witness_pair(state)
        fab, fba = functional_F(state, a @ b), functional_F(state, b @ a)
        witness = {"F_ab": fab.real, "F_ba": fba.real}
        worst = max(worst, abs(fab - fba))
    verdict = TraceVerdict.TRACIAL if worst < 10 * tol.eig else TraceVerdict.NON_TRACIAL
    return TraceReport(max_deviation=float(worst), verdict=verdict, trials=trials, seed=seed, witness=witness)


@dataclass(frozen=True)
class FactorType:
    label: str
    limit: Optional[float] = None

    def __str__(self):
        if self.label == "III_lambda":
            return f"III_lambda({self.limit:.6g})"
        return self.label

    def to_json(self) -> dict:
        out = {"type": self.label}
        if self.limit is not None:
            out["lambda"] = float(f"{self.limit:.12g}")
        return out


def classify_type(
    tail: TailRule,
    window: int = DEFAULT_WINDOW,
    tol: Tolerances = DEFAULT_TOL,
    *,
    cauchy_tol: float = 1e-6,
    summable_tol: float = 0.1,
    decay_fraction: float = 0.05,
) -> FactorType:
    """Heuristic factor type from the behaviour of ``lambda_i`` over a window.

    Terms are read from just past the last override, so finitely many changed
    terms never affect the answer. Convergence is declared when the second
    half of the window spreads by less than ``cauchy_tol``. A sequence is
    taken to tend to 0 when its second half is non-increasing and ends below
    ``decay_fraction`` of the window maximum; it counts as summable when that
    second half adds up to less than ``summable_tol``.
    """
    if window < 4:
        raise PreconditionError(f"window must be >= 4, got {window}", invariant="window size")
    start = tail.first_regular_index
    avail = tail.available()
    if avail is not None and avail < start - 1 + window:
        raise PreconditionError(
            f"tail has {avail} terms, classification needs {start - 1 + window}",
            invariant="insufficient terms",
        )
    lam = tail.lambdas(start, window)
    half = lam[window // 2 :]
    if np.all(np.abs(lam - 1.0) < tol.cluster):
        return FactorType("II_1")
    # tending to zero: monotone and fallen well below the window's peak
    if np.all(np.diff(half) <= 0) and half[-1] <= decay_fraction * lam.max():
        return FactorType("I_inf_like") if half.sum() < summable_tol else FactorType("III_0_like")
    if np.ptp(half) < cauchy_tol:
        limit = float(half[-1])
        if limit >= 1.0 - tol.cluster:
            return FactorType("II_1")
        if limit > tol.cluster:
            return FactorType("III_lambda", limit)
        return FactorType("I_inf_like") if half.sum() < summable_tol else FactorType("III_0_like")
    return FactorType("III_1_like")


class SectorVerdict(str, enum.Enum):
    SAME_SECTOR = "same_sector"
    ORTHOGONAL_SECTORS = "orthogonal_sectors"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class SectorReport:
    partial_products: np.ndarray
    log_partial_sums: np.ndarray
    verdict: SectorVerdict
    dropped_zeros: int
    mass_ratio: float

    def to_json(self, stride: int = 1) -> dict:
        return {
            "verdict": self.verdict.value,
            "dropped_zeros": self.dropped_zeros,
            "mass_ratio": float(f"{self.mass_ratio:.12g}"),
            "final_product": float(f"{self.partial_products[-1]:.12g}") if self.partial_products.size else 1.0,
            "partial_products": [float(f"{x:.12g}") for x in self.partial_products[::stride]],
        }


def sector_overlap(
    c: Callable[[np.ndarray], np.ndarray] | Sequence[float],
    truncation_N: int,
    tol: Tolerances = DEFAULT_TOL,
    window: int = DEFAULT_WINDOW,
    tau_chain: float = DEFAULT_TAU_CHAIN,
    *,
    same_ratio: float = 0.9,
    orthogonal_ratio: float = 1.5,
) -> SectorReport:
    """Decide whether ``prod c_k`` stays positive or collapses to zero.

    ``c`` is either a vectorized function of ``k = 1..N`` or an explicit
    sequence. Exact zeros are removed first. The decision compares the log
    mass ``sum |log c_k|`` over the last half of the sequence with that over
    the preceding quarter: about 2 for a linear fall (geometric product),
    about 1 for a harmonic-like tail and at most 1/2 for ``1/k^2``-type
    summable tails.
    """
    if truncation_N < 10:
        raise PreconditionError(f"truncation must be >= 10, got {truncation_N}", invariant="truncation >= 10")
    if callable(c):
        vals = np.asarray(c(np.arange(1, truncation_N + 1, dtype=float)), dtype=float)
    else:
        vals = np.asarray(c, dtype=float)[:truncation_N]
        if vals.size < truncation_N:
            raise PreconditionError(
                f"sequence has {vals.size} terms, truncation is {truncation_N}", invariant="insufficient terms"
            )
    if np.any(~np.isfinite(vals)) or np.any(vals < 0) or np.any(vals > 1):
        bad = vals[~((vals >= 0) & (vals <= 1))]
        raise PreconditionError(f"overlaps outside [0, 1]: {bad[:5].tolist()}", invariant="overlap range")
    nz = vals[vals > 0]
    dropped = int(vals.size - nz.size)
    logs = np.log(nz)
    log_sums = np.cumsum(logs)
    products = np.exp(log_sums)
    m = logs.size
    if m == 0 or np.all(np.abs(logs[-window:]) < tau_chain):
        return SectorReport(products, log_sums, SectorVerdict.SAME_SECTOR, dropped, 0.0)
    q = max(1, m // 4)
    head = np.abs(logs[q : 2 * q]).sum()
    tail = np.abs(logs[2 * q :]).sum()
    ratio = float(tail / head) if head > 0 else math.inf
    if ratio < same_ratio:
        verdict = SectorVerdict.SAME_SECTOR
    elif ratio > orthogonal_ratio:
        verdict = SectorVerdict.ORTHOGONAL_SECTORS
    else:
        verdict = SectorVerdict.UNDETERMINED
    return SectorReport(products, log_sums, verdict, dropped, ratio)
