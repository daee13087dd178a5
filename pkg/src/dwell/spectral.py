"""Hermitian eigendecomposition and the states built from it.

Ground states, canonical Gibbs states and the unitary propagator all come
from the full spectrum, which is cheap here: the Hilbert space grows only
linearly with the particle number.
"""

from dataclasses import InitVar, dataclass

import numpy as np

from dwell.basis import FockBasis, check_same_basis
from dwell.operators import OperatorMatrix

DEGENERACY_RTOL = 1e-9


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvector columns."""

    basis: FockBasis
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one positive hermitian matrix over a FockBasis.

    Pass validate=False to skip the (eigenvalue-based) positivity check,
    e.g. for intermediate states along an integrated trajectory.
    """

    basis: FockBasis
    data: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        d = self.basis.dim
        if self.data.shape != (d, d):
            raise ValueError(f"matrix shape {self.data.shape} != basis dim {d}")
        if validate:
            if np.max(np.abs(self.data - self.data.conj().T)) > 1e-10:
                raise ValueError("density matrix is not hermitian")
            tr = np.trace(self.data)
            if abs(tr - 1.0) > 1e-10:
                raise ValueError(f"density matrix has trace {tr}")
            lo = np.linalg.eigvalsh((self.data + self.data.conj().T) / 2)[0]
            if lo < -1e-8:
                raise ValueError(f"density matrix has eigenvalue {lo:.3e}")

    @classmethod
    def from_pure(cls, basis: FockBasis, vec: np.ndarray) -> "DensityMatrix":
        nrm = np.linalg.norm(vec)
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError("pure state vector is not normalized")
        return cls(basis, np.outer(vec, vec.conj()))

    @property
    def dim(self) -> int:
        return self.basis.dim


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column real-positive."""
    vecs = vecs.copy()
    for k in range(vecs.shape[1]):
        i = np.argmax(np.abs(vecs[:, k]))
        pivot = vecs[i, k]
        if pivot != 0:
            vecs[:, k] *= np.conj(pivot) / abs(pivot)
    return vecs


def eigh(op: OperatorMatrix) -> SpectralDecomposition:
    """Full decomposition of a hermitian operator, phase-fixed columns."""
    if not op.hermitian:
        raise ValueError("eigh requires a hermitian operator")
    vals, vecs = np.linalg.eigh(op.data)
    return SpectralDecomposition(op.basis, vals, _fix_phases(vecs))


def ground_state(op: OperatorMatrix):
    """Lowest eigenvector and a flag for a (near-)degenerate ground level."""
    dec = eigh(op)
    vals = dec.eigenvalues
    degenerate = bool(
        len(vals) > 1
        and vals[1] - vals[0] <= DEGENERACY_RTOL * max(1.0, abs(vals[0]))
    )
    return dec.eigenvectors[:, 0].copy(), degenerate


def gibbs_state(op: OperatorMatrix, beta: float) -> DensityMatrix:
    """Canonical state exp(-beta H) / Tr exp(-beta H).

    Weights are computed relative to the ground energy, so large beta is
    safe up to beta ~ 700 / gap.
    """
    if not np.isfinite(beta) or beta < 0:
        raise ValueError("beta must be finite and non-negative")
    dec = eigh(op)
    w = np.exp(-beta * (dec.eigenvalues - dec.eigenvalues[0]))
    w /= w.sum()
    rho = (dec.eigenvectors * w) @ dec.eigenvectors.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(op.basis, rho)


def matrix_exp_hermitian_action(op, scale: complex, vec: np.ndarray) -> np.ndarray:
    """exp(scale * op) @ vec through the spectrum; scale = -i t is unitary.

    Accepts an OperatorMatrix or a precomputed SpectralDecomposition.
    """
    dec = op if isinstance(op, SpectralDecomposition) else eigh(op)
    if vec.shape[0] != dec.eigenvectors.shape[0]:
        raise ValueError("vector dimension does not match the operator")
    coeff = dec.eigenvectors.conj().T @ vec
    return dec.eigenvectors @ (np.exp(scale * dec.eigenvalues) * coeff)
