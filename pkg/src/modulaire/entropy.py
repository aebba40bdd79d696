"""Von Neumann, entanglement and Araki relative entropies (natural log)."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionError, PreconditionError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_vector,
    eig_hermitian,
    partial_trace,
    reshape_bipartite,
    safe_log,
)
from .modular import relative_modular
from .states import DensityMatrix


class Method(str, enum.Enum):
    DIRECT_TRACE = "direct_trace"
    MODULAR_OPERATOR = "modular_operator"


@dataclass(frozen=True)
class EntropyReport:
    value: float
    method: Method
    support_dim: int
    diagnostic: Optional[str] = None

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    def to_json(self) -> dict:
        out = {
            "value": format_value(self.value),
            "method": self.method.value,
            "support_dim": self.support_dim,
        }
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        return out


def format_value(x: float):
    """12 significant digits; infinities become the string ``"inf"``."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.12g}")


def von_neumann_entropy(rho, tol: Tolerances = DEFAULT_TOL) -> EntropyReport:
    """``-sum lambda ln lambda`` with ``0 ln 0 = 0``."""
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix.from_matrix(rho, tol)
    lam = eig_hermitian(rho.matrix, tol).eigenvalues
    pos = lam > tol.eig
    value = float(-np.sum(lam[pos] * np.log(lam[pos])))
    return EntropyReport(value=max(value, 0.0), method=Method.DIRECT_TRACE, support_dim=int(pos.sum()))


def entanglement_entropy(psi, dims: Tuple[int, int], tol: Tolerances = DEFAULT_TOL, keep: int = 0) -> EntropyReport:
    psi = as_vector(psi, "psi")
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise PreconditionError("zero vector", invariant="nonzero vector")
    psi = psi / nrm
    rho = partial_trace(np.outer(psi, psi.conj()), dims, keep=keep)
    return von_neumann_entropy(DensityMatrix(matrix=rho), tol)


def _swap_slots(psi, dims):
    m = reshape_bipartite(psi, dims)
    return m.T.reshape(-1)


def relative_entropy_oracle(rho, sigma, tol: Tolerances = DEFAULT_TOL) -> float:
    """``Tr[rho (log rho - log sigma)]``, +inf when ``supp rho`` is not inside ``supp sigma``."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    es = eig_hermitian(sigma, tol)
    kernel = es.eigenvectors[:, es.eigenvalues <= tol.eig]
    if kernel.shape[1] and np.trace(kernel.conj().T @ rho @ kernel).real > tol.eig:
        return math.inf
    val = np.trace(rho @ (safe_log(rho, tol) - safe_log(sigma, tol))).real
    return float(val)


def araki_relative_entropy(
    psi, phi, dims: Tuple[int, int], tol: Tolerances = DEFAULT_TOL, slot: int = 1
) -> EntropyReport:
    """``-<psi| log Delta_{psi|phi} |psi>`` through the relative modular operator.

    ``slot`` selects which tensor factor carries the algebra (1 or 2).
    Returns an infinite value with a diagnostic when the reduced state of
    ``phi`` misses part of the support of that of ``psi``.
    """
    if slot not in (1, 2):
        raise DimensionError(f"slot must be 1 or 2, got {slot}")
    if slot == 2:
        psi, phi = _swap_slots(psi, dims), _swap_slots(phi, dims)
        dims = (dims[1], dims[0])
    rmd = relative_modular(psi, phi, dims, tol)
    n = rmd.n
    es = eig_hermitian(rmd.sigma1.matrix, tol)
    support = int(np.sum(es.eigenvalues > tol.eig))
    if support < n:
        # psi is cyclic-separating so rho1 is faithful: any kernel of sigma1 is a violation
        return EntropyReport(
            value=math.inf,
            method=Method.MODULAR_OPERATOR,
            support_dim=support,
            diagnostic=f"reduced state of phi has rank {support} < {n}; support condition fails",
        )
    psi_t = rmd.state_psi.tilde()
    log_delta_psi = rmd.log_superoperator(psi_t)
    value = -float(np.vdot(psi_t, log_delta_psi).real)
    return EntropyReport(value=value, method=Method.MODULAR_OPERATOR, support_dim=support)
