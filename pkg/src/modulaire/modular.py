"""Tomita-Takesaki objects for a bipartite pure state.

The algebra is ``A = M_n (x) 1`` acting on ``C^n (x) C^n`` and its commutant
is ``1 (x) M_n``. All modular operators are first written in the Schmidt
frame of the state, where ``psi = sum_k c_k |k, k>`` with real positive
``c_k``, then rotated back to the computational basis with
``W = left (x) right``.

Antilinear maps are kept as :class:`AntilinearOperator` (a matrix composed
with complex conjugation), never as a bare matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .errors import DimensionError, PreconditionError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_matrix,
    as_vector,
    dagger,
    eig_hermitian,
    kron,
)
from .states import DensityMatrix, SchmidtDecomposition, reduced_density, schmidt


@dataclass(frozen=True)
class AntilinearOperator:
    """``x -> matrix @ conj(x)``."""

    matrix: np.ndarray

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ np.conj(np.asarray(x, dtype=complex))

    def adjoint(self) -> "AntilinearOperator":
        # <y, A x> = conj(<A^dagger y, x>) holds with A^dagger = M^T K
        return AntilinearOperator(self.matrix.T)

    def compose(self, other: "AntilinearOperator") -> np.ndarray:
        """Linear matrix of ``self o other``."""
        return self.matrix @ np.conj(other.matrix)

    def after_linear(self, lin: np.ndarray) -> "AntilinearOperator":
        """``self o lin`` for a linear ``lin``."""
        return AntilinearOperator(self.matrix @ np.conj(lin))


def _square_dims(dims) -> int:
    if len(dims) != 2 or dims[0] != dims[1]:
        raise DimensionError(f"modular theory here needs a square bipartition, got {tuple(dims)}")
    return int(dims[0])


def is_cyclic_separating(psi, dims: Tuple[int, int], tol: Tolerances = DEFAULT_TOL) -> bool:
    n = _square_dims(dims)
    return schmidt(psi, dims, tol).schmidt_rank == n


def _swap_permutation(n: int) -> np.ndarray:
    """Permutation matrix ``|i, j> -> |j, i>``."""
    p = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            p[j * n + i, i * n + j] = 1.0
    return p


def _positive_power(h: np.ndarray, z: complex, tol: Tolerances) -> np.ndarray:
    """``h^z`` on the support of a PSD matrix, zero on its kernel."""
    es = eig_hermitian(h, tol)
    lam = es.eigenvalues
    out = np.zeros(lam.shape, dtype=complex)
    pos = lam > tol.eig
    out[pos] = np.exp(z * np.log(lam[pos]))
    u = es.eigenvectors
    return (u * out) @ dagger(u)


@dataclass(frozen=True)
class ModularData:
    state: SchmidtDecomposition
    rho1: DensityMatrix
    rho2: DensityMatrix
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    @property
    def n(self) -> int:
        return self.state.dims[0]

    @property
    def c(self) -> np.ndarray:
        return self.state.coefficients

    @property
    def frame(self) -> np.ndarray:
        """Unitary ``W`` taking Schmidt-frame coordinates to the computational basis."""
        return kron(self.state.left_basis, self.state.right_basis)

    @property
    def delta_eigen(self) -> Dict[Tuple[int, int], float]:
        c2 = self.c**2
        return {(i, j): float(c2[i] / c2[j]) for i in range(self.n) for j in range(self.n)}

    def psi(self) -> np.ndarray:
        return self.state.vector()

    def ratios(self) -> np.ndarray:
        """``|c_i|^2 / |c_j|^2`` laid out as a flat ``(i, j)`` array."""
        c2 = self.c**2
        return np.outer(c2, 1.0 / c2).reshape(-1)

    # frame-level building blocks
    def _tomita_frame(self) -> np.ndarray:
        n, c = self.n, self.c
        m = np.zeros((n * n, n * n), dtype=complex)
        for i in range(n):
            for j in range(n):
                # S |j, i> = (c_j / c_i) |i, j>
                m[i * n + j, j * n + i] = c[j] / c[i]
        return m

    def tomita(self) -> AntilinearOperator:
        w = self.frame
        return AntilinearOperator(w @ self._tomita_frame() @ w.T)

    def conjugation(self) -> AntilinearOperator:
        w = self.frame
        return AntilinearOperator(w @ _swap_permutation(self.n) @ w.T)

    def delta_power(self, z: complex) -> np.ndarray:
        """Linear matrix of ``Delta^z`` in the computational basis."""
        w = self.frame
        return (w * np.power(self.ratios().astype(complex), z)) @ dagger(w)

    def delta(self) -> np.ndarray:
        return self.delta_power(1.0)


def modular_data(psi, dims: Tuple[int, int], tol: Tolerances = DEFAULT_TOL) -> ModularData:
    n = _square_dims(dims)
    psi = as_vector(psi, "psi")
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise PreconditionError("zero vector", invariant="nonzero vector")
    if abs(nrm - 1.0) > tol.eig * psi.size:
        raise PreconditionError(f"state norm = {nrm:.12g}, expected 1", invariant="unit norm")
    sd = schmidt(psi, dims, tol)
    if sd.schmidt_rank < n:
        raise PreconditionError(
            f"state is not cyclic and separating: Schmidt rank {sd.schmidt_rank} < {n}",
            invariant="cyclic separating",
        )
    return ModularData(
        state=sd,
        rho1=reduced_density(psi, dims, 0),
        rho2=reduced_density(psi, dims, 1),
        tol=tol,
    )


def _check_len(md: ModularData, xi) -> np.ndarray:
    xi = as_vector(xi, "xi")
    if xi.size != md.n * md.n:
        raise DimensionError(f"vector of length {xi.size} does not live in C^{md.n} (x) C^{md.n}")
    return xi


def tomita_apply(md: ModularData, xi) -> np.ndarray:
    """Antilinear ``S (a (x) 1) psi = (a^dagger (x) 1) psi``."""
    return md.tomita()(_check_len(md, xi))


def modular_operator_apply(md: ModularData, xi) -> np.ndarray:
    return md.delta() @ _check_len(md, xi)


def modular_conjugation_apply(md: ModularData, xi) -> np.ndarray:
    return md.conjugation()(_check_len(md, xi))


def modular_flow(md: ModularData, a, s: float) -> np.ndarray:
    """``rho1^{is} a rho1^{-is}``, the first-slot action of ``Delta^{is} . Delta^{-is}``."""
    a = as_matrix(a, "operator")
    if a.shape != (md.n, md.n):
        raise DimensionError(f"operator must act on C^{md.n}, got {a.shape}")
    u = md.state.left_basis
    phase = np.exp(1j * s * 2.0 * np.log(md.c))
    left = (u * phase) @ dagger(u)
    return left @ a @ dagger(left)


def conjugation_to_commutant(md: ModularData, a, frame: str = "schmidt") -> np.ndarray:
    """Second-slot operator ``b`` with ``J (a (x) 1) J = 1 (x) b``.

    In the Schmidt frame ``b`` is the entrywise conjugate of ``a``. With
    ``frame="computational"`` both ``a`` and the result are in the standard
    basis.
    """
    a = as_matrix(a, "operator")
    if a.shape != (md.n, md.n):
        raise DimensionError(f"operator must act on C^{md.n}, got {a.shape}")
    if frame == "schmidt":
        return np.conj(a)
    if frame == "computational":
        u, v = md.state.left_basis, md.state.right_basis
        a_frame = dagger(u) @ a @ u
        return v @ np.conj(a_frame) @ dagger(v)
    raise ValueError(f"unknown frame {frame!r}")


@dataclass(frozen=True)
class RelativeModularData:
    """Relative modular objects for the pair (psi, phi); psi fixes the frame."""

    state_psi: SchmidtDecomposition
    state_phi: SchmidtDecomposition
    rho1: DensityMatrix
    rho2: DensityMatrix
    sigma1: DensityMatrix
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    @property
    def n(self) -> int:
        return self.state_psi.dims[0]

    def tomita(self) -> AntilinearOperator:
        """``S xi~ = (psi~^dagger)^{-1} xi~^dagger phi~`` as a matrix-with-conjugation."""
        n = self.n
        left = np.linalg.inv(dagger(self.state_psi.tilde()))
        phi_t = self.state_phi.tilde()
        cols = []
        for k in range(n * n):
            e = np.zeros(n * n, dtype=complex)
            e[k] = 1.0
            cols.append((left @ dagger(e.reshape(n, n)) @ phi_t).reshape(-1))
        return AntilinearOperator(np.stack(cols, axis=1))

    def superoperator(self, xi_tilde) -> np.ndarray:
        """``xi~ -> sigma1 xi~ (rho2^{-1})^T``; equals ``sigma1 xi~ rho1^{-1}`` in the Schmidt frame."""
        r = np.linalg.inv(self.rho2.matrix)
        return self.sigma1.matrix @ as_matrix(xi_tilde) @ r.T

    def delta(self) -> np.ndarray:
        """``sigma1 (x) rho2^{-1}`` acting on row-major vectors."""
        return kron(self.sigma1.matrix, np.linalg.inv(self.rho2.matrix))

    def delta_power(self, z: complex) -> np.ndarray:
        return kron(
            _positive_power(self.sigma1.matrix, z, self.tol),
            _positive_power(self.rho2.matrix, -z, self.tol),
        )

    def eigenvalues(self) -> np.ndarray:
        d2 = eig_hermitian(self.sigma1.matrix, self.tol).eigenvalues
        c2 = self.state_psi.coefficients**2
        return np.sort(np.outer(d2, 1.0 / c2).reshape(-1))

    def log_superoperator(self, xi_tilde) -> np.ndarray:
        """``log Delta`` in the tilde picture; raises if ``sigma1`` is singular."""
        from .linalg import safe_log

        log_s = safe_log(self.sigma1.matrix, self.tol, zero_convention=False)
        log_r = safe_log(self.rho2.matrix, self.tol, zero_convention=False)
        x = as_matrix(xi_tilde)
        return log_s @ x - x @ log_r.T

    def flow(self, a, s: float) -> np.ndarray:
        """``sigma1^{is} a sigma1^{-is}`` on the support of ``sigma1``."""
        p = _positive_power(self.sigma1.matrix, 1j * s, self.tol)
        return p @ as_matrix(a) @ dagger(p)


def relative_modular(psi, phi, dims: Tuple[int, int], tol: Tolerances = DEFAULT_TOL) -> RelativeModularData:
    md = modular_data(psi, dims, tol)
    phi = as_vector(phi, "phi")
    if phi.size != md.n * md.n:
        raise DimensionError(f"phi has length {phi.size}, expected {md.n * md.n}")
    return RelativeModularData(
        state_psi=md.state,
        state_phi=schmidt(phi, dims, tol),
        rho1=md.rho1,
        rho2=md.rho2,
        sigma1=reduced_density(phi, dims, 0),
        tol=tol,
    )
