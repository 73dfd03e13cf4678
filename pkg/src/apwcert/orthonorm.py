"""Schmidt orthonormalization of a nearly orthonormal family, driven by its Gram matrix."""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NotPositiveDefinite


def norm_1(A):
    """Max column absolute sum, max_j sum_i |a_ij|."""
    A = np.atleast_2d(A)
    return float(np.max(np.sum(np.abs(A), axis=0))) if A.size else 0.0


def norm_inf(A):
    """Max row absolute sum, max_i sum_j |a_ij|."""
    A = np.atleast_2d(A)
    return float(np.max(np.sum(np.abs(A), axis=1))) if A.size else 0.0


@dataclass(frozen=True, eq=False)
class GramPerturbation:
    """eps = gram - I together with the two smallness statistics."""

    eps: np.ndarray

    @cached_property
    def norm1(self):
        return norm_1(self.eps)

    @cached_property
    def eps_max(self):
        return float(np.max(np.abs(np.diag(self.eps)))) if self.eps.size else 0.0

    @property
    def smallness(self):
        """2 ||eps||_1 + eps_max; the bound on B - I needs this below 1."""
        return 2.0 * self.norm1 + self.eps_max

    def bound(self):
        """(2||eps||_1 + eps_max) / (1 - 2||eps||_1 - eps_max), or inf when the smallness fails."""
        t = self.smallness
        return t / (1.0 - t) if t < 1.0 else float("inf")


def gram_perturbation(gram):
    gram = np.asarray(gram, dtype=np.complex128)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise ValueError("gram must be a square matrix")
    if np.max(np.abs(gram - gram.conj().T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(gram), initial=0.0)):
        raise ValueError("gram must be Hermitian")
    return GramPerturbation(gram - np.eye(gram.shape[0]))


@dataclass
class SchmidtResult:
    B: np.ndarray
    bound_ok: bool
    deviation: float
    bound: float
    perturbation: GramPerturbation

    def __iter__(self):
        return iter((self.B, self.bound_ok))


def schmidt_matrix(gram):
    """Lower-triangular B with B gram B^dagger = I, built as B = F (I - B_tilde).

    Row i of B_tilde holds the projection coefficients of Psi^i on the
    earlier functions, obtained by a direct solve with the leading (i-1)
    minor of gram. F = diag(1 / ||Psi_tilde^i||).

    ``bound_ok`` reports whether ||B - I||_inf < (2||eps||_1 + eps_max) /
    (1 - 2||eps||_1 - eps_max); it is False whenever the smallness condition fails.
    """
    pert = gram_perturbation(gram)
    G = np.asarray(gram, dtype=np.complex128)
    M = G.shape[0]
    B = np.zeros((M, M), dtype=np.complex128)
    for i in range(M):
        row = np.zeros(M, dtype=np.complex128)
        row[i] = 1.0
        if i:
            # coefficients c with <Psi^i - sum_k c_k Psi^k, Psi^j> = 0 for j < i
            try:
                coef = np.linalg.solve(G[:i, :i].T, G[i, :i])
            except np.linalg.LinAlgError as exc:
                raise NotPositiveDefinite(f"leading {i}x{i} minor of the Gram matrix is singular") from exc
            row[:i] = -coef
        nrm2 = float(np.real(row @ G @ row.conj()))
        if not nrm2 > 0:
            raise NotPositiveDefinite(f"Gram matrix is not positive definite (step {i}, residual norm^2 {nrm2:.3e})")
        B[i] = row / np.sqrt(nrm2)
    deviation = norm_inf(B - np.eye(M))
    bound = pert.bound()
    return SchmidtResult(B, bool(pert.smallness < 1.0 and deviation < bound), deviation, bound, pert)


def orthonormality_residual(B, gram):
    """||B gram B^dagger - I||_inf."""
    return norm_inf(B @ gram @ B.conj().T - np.eye(B.shape[0]))


def random_gram(rng, M, target=None):
    """Random Hermitian Gram matrix I + eps with 2||eps||_1 + eps_max = target < 1.

    Positive definiteness follows from ||eps||_2 <= ||eps||_1 < 1/2.
    """
    if target is None:
        target = rng.uniform(0.01, 0.99)
    E = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
    E = 0.5 * (E + E.conj().T)
    E[np.diag_indices(M)] = np.real(np.diag(E))
    t = 2.0 * norm_1(E) + float(np.max(np.abs(np.diag(E))))
    E *= target / t
    return np.eye(M) + E
